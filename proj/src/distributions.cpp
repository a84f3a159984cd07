#include "llnlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "llnlab/errors.hpp"
#include "llnlab/numeric.hpp"

namespace llnlab {

namespace {

// Values closer than this are the same support point; probability masses at
// merged points are added.  Distinct points must also be at least this far
// apart after sorting or the input is rejected as ambiguous.
constexpr double kValueTol = 1e-12;

double real_gcd(double a, double b, double tol) {
    a = std::abs(a);
    b = std::abs(b);
    if (a < b) std::swap(a, b);
    while (b > tol) {
        // IEEE remainder lands in [-b/2, b/2], so near-multiples collapse to
        // ~0 instead of the fmod pathology of returning almost b.
        double r = std::abs(std::remainder(a, b));
        a = b;
        b = r;
    }
    return a;
}

} // namespace

DiscreteDist::DiscreteDist(std::string label, std::vector<double> values,
                           std::vector<double> probs)
    : label_(std::move(label)) {
    if (values.size() != probs.size())
        throw std::invalid_argument("distribution: values/probs size mismatch");
    if (values.empty())
        throw std::invalid_argument("distribution: empty support");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("distribution: non-finite support value");
    for (double p : probs)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("distribution: probabilities must be finite and > 0");

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    for (std::size_t idx : order) {
        double v = values[idx], p = probs[idx];
        if (!values_.empty() && v - values_.back() < kValueTol) {
            probs_.back() += p; // merge duplicate support point
        } else {
            values_.push_back(v);
            probs_.push_back(p);
        }
    }

    NeumaierSum total;
    for (double p : probs_) total.add(p);
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw std::invalid_argument("distribution: probabilities sum to " +
                                    format_double(total.value()) + ", expected 1");
    double norm = total.value();
    for (double& p : probs_) p /= norm;

    NeumaierSum m;
    for (std::size_t i = 0; i < values_.size(); ++i) m.add(values_[i] * probs_[i]);
    mean_ = m.value();
}

double DiscreteDist::abs_moment(double gamma) const {
    if (!(gamma >= 1.0))
        throw std::invalid_argument("abs_moment: gamma must be >= 1");
    NeumaierSum s;
    for (std::size_t i = 0; i < values_.size(); ++i)
        s.add(std::pow(std::abs(values_[i]), gamma) * probs_[i]);
    return s.value();
}

AmbiguityFamily::AmbiguityFamily(std::vector<DiscreteDist> members)
    : members_(std::move(members)) {
    if (members_.empty())
        throw std::invalid_argument("family: needs at least one member");

    mu_lo_ = std::numeric_limits<double>::infinity();
    mu_hi_ = -std::numeric_limits<double>::infinity();
    min_value_ = std::numeric_limits<double>::infinity();
    max_value_ = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members_.size(); ++i) {
        double m = members_[i].mean();
        if (m < mu_lo_) { mu_lo_ = m; lo_index_ = i; }
        if (m > mu_hi_) { mu_hi_ = m; hi_index_ = i; }
        min_value_ = std::min(min_value_, members_[i].min_value());
        max_value_ = std::max(max_value_, members_[i].max_value());
    }

    for (const auto& d : members_)
        union_support_.insert(union_support_.end(), d.values().begin(), d.values().end());
    std::sort(union_support_.begin(), union_support_.end());
    union_support_.erase(std::unique(union_support_.begin(), union_support_.end(),
                                     [](double a, double b) { return b - a < kValueTol; }),
                         union_support_.end());

    // Coarsest common grid: gcd of consecutive gaps in the union support,
    // accepted only if every point reconstructs to within 1e-12.
    if (union_support_.size() == 1) {
        lattice_ = Lattice{union_support_[0], 1.0};
        return;
    }
    double g = 0.0;
    for (std::size_t i = 1; i < union_support_.size(); ++i)
        g = real_gcd(g, union_support_[i] - union_support_[i - 1], 1e-12);
    if (g < 1e-9) return; // grid too fine to trust
    double offset = union_support_.front();
    for (double v : union_support_) {
        double idx = std::round((v - offset) / g);
        if (idx < 0 || std::abs(offset + idx * g - v) > kValueTol) return;
    }
    lattice_ = Lattice{offset, g};
}

DiscreteDist dirac(double v, std::string label) {
    if (label.empty()) label = "dirac(" + format_double(v) + ")";
    return DiscreteDist(std::move(label), {v}, {1.0});
}

DiscreteDist bernoulli(double p, std::string label) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("bernoulli: p must lie in (0, 1)");
    if (label.empty()) label = "bern(" + format_double(p) + ")";
    return DiscreteDist(std::move(label), {0.0, 1.0}, {1.0 - p, p});
}

AmbiguityFamily family_from_json(const nlohmann::json& j) {
    // Accepted shapes: a bare array of members, or {"members": [...]}.
    const nlohmann::json* list = nullptr;
    if (j.is_array())
        list = &j;
    else if (j.is_object() && j.contains("members") && j["members"].is_array())
        list = &j["members"];
    else
        throw IoError("family json: expected a member array or an object with a 'members' array");
    std::vector<DiscreteDist> members;
    std::size_t idx = 0;
    for (const auto& m : *list) {
        if (!m.is_object() || !m.contains("values") || !m.contains("probs"))
            throw IoError("family json: member " + std::to_string(idx) +
                          " needs 'values' and 'probs'");
        std::string label = m.value("label", "member" + std::to_string(idx));
        std::vector<double> values, probs;
        try {
            values = m["values"].get<std::vector<double>>();
            probs = m["probs"].get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError("family json: member " + std::to_string(idx) + ": " + e.what());
        }
        try {
            members.emplace_back(std::move(label), std::move(values), std::move(probs));
        } catch (const std::invalid_argument& e) {
            throw IoError("family json: member " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    try {
        return AmbiguityFamily(std::move(members));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("family json: ") + e.what());
    }
}

nlohmann::json family_to_json(const AmbiguityFamily& fam) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& d : fam.members()) {
        members.push_back({{"label", d.label()},
                           {"values", d.values()},
                           {"probs", d.probs()}});
    }
    return nlohmann::json{{"members", std::move(members)}};
}

AmbiguityFamily load_family(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open family file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("family file " + path.string() + ": " + e.what());
    }
    return family_from_json(j);
}

} // namespace llnlab
