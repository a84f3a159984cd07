#include "llnlab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "llnlab/errors.hpp"
#include "llnlab/numeric.hpp"

namespace llnlab {

double PiFunction::evaluate(std::span<const double> prefix) const {
    if (prefix.size() != d)
        throw std::invalid_argument("pi function: prefix length mismatch");
    if (!table.empty()) {
        for (const auto& entry : table) {
            if (entry.prefix.size() != d) continue;
            bool match = true;
            for (std::size_t i = 0; i < d; ++i)
                if (std::abs(entry.prefix[i] - prefix[i]) > 1e-9) { match = false; break; }
            if (match) return entry.value;
        }
        throw std::invalid_argument("pi function: realized prefix not covered by table");
    }
    if (avg_values.empty())
        throw std::invalid_argument("pi function: neither table nor average rule given");
    if (avg_values.size() != avg_breaks.size() + 1)
        throw std::invalid_argument("pi function: average rule needs one more value than breaks");
    double avg = 0.0;
    for (double x : prefix) avg += x;
    avg /= static_cast<double>(d);
    // values[i] applies on [breaks[i-1], breaks[i]); below all breaks: values[0].
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(avg_breaks.begin(), avg_breaks.end(), avg) - avg_breaks.begin());
    return avg_values[idx];
}

namespace {

std::vector<double> cumulative_from_weights(const std::vector<double>& weights,
                                            std::size_t members) {
    std::vector<double> w = weights;
    if (w.empty()) w.assign(members, 1.0);
    if (w.size() != members)
        throw std::invalid_argument("mixture policy: weight count differs from member count");
    double total = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("mixture policy: weights must be finite and >= 0");
        total += x;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("mixture policy: weights sum to zero");
    std::vector<double> cum;
    cum.reserve(members);
    double run = 0.0;
    for (double x : w) {
        run += x / total;
        cum.push_back(run);
    }
    cum.back() = 1.0;
    return cum;
}

} // namespace

PolicyRun::PolicyRun(const PolicySpec& spec, const AmbiguityFamily& fam, RngStream mixture_stream)
    : fam_(&fam), spec_(spec), stream_(mixture_stream) {
    if (const auto* c = std::get_if<ConstantPolicy>(&spec_)) {
        if (c->member >= fam.size())
            throw std::invalid_argument("constant policy: member index out of range");
    } else if (const auto* k = std::get_if<KappaTargetPolicy>(&spec_)) {
        schedule_.emplace(k->mu, fam.mu_lo(), fam.mu_hi());
    } else if (const auto* p = std::get_if<PiTargetPolicy>(&spec_)) {
        if (p->d < 1)
            throw std::invalid_argument("pi policy: prefix length d must be >= 1");
        if (p->pi.d != p->d)
            throw std::invalid_argument("pi policy: d differs from the pi function's d");
        PolicySpec base_spec = p->base ? p->base->spec : PolicySpec(RandomMixturePolicy{});
        base_ = std::make_unique<PolicyRun>(base_spec, fam, mixture_stream);
    } else if (const auto* b = std::get_if<StationaryBlockPolicy>(&spec_)) {
        if (b->indices.empty())
            throw std::invalid_argument("block policy: needs at least one index");
        for (std::size_t i : b->indices)
            if (i >= fam.size())
                throw std::invalid_argument("block policy: member index out of range");
    } else if (const auto* m = std::get_if<RandomMixturePolicy>(&spec_)) {
        cumulative_weights_ = cumulative_from_weights(m->weights, fam.size());
    }
}

std::size_t PolicyRun::select(std::span<const double> history, std::size_t step) {
    if (step != history.size() + 1)
        throw std::invalid_argument("policy select: step must equal history length + 1");

    if (const auto* c = std::get_if<ConstantPolicy>(&spec_)) {
        return c->member;
    }

    if (std::get_if<KappaTargetPolicy>(&spec_)) {
        double kappa = schedule_->next();
        return kappa == schedule_->mu_hi() ? fam_->hi_index() : fam_->lo_index();
    }

    if (const auto* p = std::get_if<PiTargetPolicy>(&spec_)) {
        if (step <= p->d) return base_->select(history, step);
        if (!committed_pi_) {
            // Evaluated exactly once, on the realized prefix, at step d+1.
            double pi = p->pi.evaluate(history.subspan(0, p->d));
            if (pi < fam_->mu_lo() || pi > fam_->mu_hi()) {
                if (!p->pi.clip)
                    throw std::invalid_argument("pi policy: output " + format_double(pi) +
                                                " outside the mean envelope and clip=false");
                pi = std::clamp(pi, fam_->mu_lo(), fam_->mu_hi());
            }
            committed_pi_ = pi;
            schedule_.emplace(pi, fam_->mu_lo(), fam_->mu_hi());
        }
        double kappa = schedule_->next();
        return kappa == schedule_->mu_hi() ? fam_->hi_index() : fam_->lo_index();
    }

    if (const auto* b = std::get_if<StationaryBlockPolicy>(&spec_)) {
        return b->indices[(step - 1) % b->indices.size()];
    }

    // Mixture: one dedicated-stream draw per step, indexed by the step so the
    // choice depends only on (seed, trial, step).
    double u = stream_.next();
    auto it = std::upper_bound(cumulative_weights_.begin(), cumulative_weights_.end(), u);
    if (it == cumulative_weights_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_weights_.begin());
}

double stationary_mean(const StationaryBlockPolicy& p, const AmbiguityFamily& fam) {
    if (p.indices.empty())
        throw std::invalid_argument("stationary mean: empty block");
    NeumaierSum s;
    for (std::size_t i : p.indices) {
        if (i >= fam.size())
            throw std::invalid_argument("stationary mean: member index out of range");
        s.add(fam.member(i).mean());
    }
    return s.value() / static_cast<double>(p.indices.size());
}

PiFunction pi_function_from_json(const nlohmann::json& j) {
    PiFunction pi;
    if (!j.is_object())
        throw IoError("pi spec: expected an object");
    if (!j.contains("d"))
        throw IoError("pi spec: missing 'd'");
    pi.d = j["d"].get<std::size_t>();
    pi.clip = j.value("clip", true);
    if (j.contains("table")) {
        for (const auto& row : j["table"]) {
            if (!row.is_array() || row.size() != 2)
                throw IoError("pi spec: table rows are [prefix, value] pairs");
            PiFunction::TableEntry e;
            e.prefix = row[0].get<std::vector<double>>();
            e.value = row[1].get<double>();
            if (e.prefix.size() != pi.d)
                throw IoError("pi spec: table prefix length differs from d");
            pi.table.push_back(std::move(e));
        }
    }
    if (j.contains("avg_breaks") || j.contains("avg_values")) {
        pi.avg_breaks = j.value("avg_breaks", std::vector<double>{});
        pi.avg_values = j.value("avg_values", std::vector<double>{});
        if (pi.avg_values.size() != pi.avg_breaks.size() + 1)
            throw IoError("pi spec: avg_values must have one more entry than avg_breaks");
        if (!std::is_sorted(pi.avg_breaks.begin(), pi.avg_breaks.end()))
            throw IoError("pi spec: avg_breaks must be ascending");
    }
    if (pi.table.empty() && pi.avg_values.empty())
        throw IoError("pi spec: needs a 'table' or an average rule");
    return pi;
}

nlohmann::json pi_function_to_json(const PiFunction& pi) {
    nlohmann::json j{{"d", pi.d}, {"clip", pi.clip}};
    if (!pi.table.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& e : pi.table) rows.push_back({e.prefix, e.value});
        j["table"] = std::move(rows);
    }
    if (!pi.avg_values.empty()) {
        j["avg_breaks"] = pi.avg_breaks;
        j["avg_values"] = pi.avg_values;
    }
    return j;
}

PolicySpec policy_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw IoError("policy spec: expected an object with a 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "constant") {
        ConstantPolicy p;
        if (!j.contains("member")) throw IoError("policy spec: constant needs 'member'");
        p.member = j["member"].get<std::size_t>();
        return p;
    }
    if (kind == "kappa") {
        KappaTargetPolicy p;
        if (!j.contains("mu")) throw IoError("policy spec: kappa needs 'mu'");
        p.mu = j["mu"].get<double>();
        return p;
    }
    if (kind == "pi") {
        PiTargetPolicy p;
        p.pi = pi_function_from_json(j);
        p.d = p.pi.d;
        if (j.contains("base"))
            p.base = std::make_shared<PolicySpecBox>(PolicySpecBox{policy_from_json(j["base"])});
        return p;
    }
    if (kind == "block") {
        StationaryBlockPolicy p;
        if (!j.contains("indices")) throw IoError("policy spec: block needs 'indices'");
        p.indices = j["indices"].get<std::vector<std::size_t>>();
        return p;
    }
    if (kind == "mixture") {
        RandomMixturePolicy p;
        p.weights = j.value("weights", std::vector<double>{});
        return p;
    }
    throw IoError("policy spec: unknown kind '" + kind + "'");
}

nlohmann::json policy_to_json(const PolicySpec& spec) {
    nlohmann::json j;
    if (const auto* c = std::get_if<ConstantPolicy>(&spec)) {
        j = {{"kind", "constant"}, {"member", c->member}};
    } else if (const auto* k = std::get_if<KappaTargetPolicy>(&spec)) {
        j = {{"kind", "kappa"}, {"mu", k->mu}};
    } else if (const auto* p = std::get_if<PiTargetPolicy>(&spec)) {
        j = pi_function_to_json(p->pi);
        j["kind"] = "pi";
        if (p->base) j["base"] = policy_to_json(p->base->spec);
    } else if (const auto* b = std::get_if<StationaryBlockPolicy>(&spec)) {
        j = {{"kind", "block"}, {"indices", b->indices}};
    } else if (const auto* m = std::get_if<RandomMixturePolicy>(&spec)) {
        j = {{"kind", "mixture"}};
        if (!m->weights.empty()) j["weights"] = m->weights;
    }
    return j;
}

} // namespace llnlab
