#include "llnlab/nested_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "llnlab/errors.hpp"
#include "llnlab/numeric.hpp"

namespace llnlab {

namespace {

// Per-member support rewritten as integer lattice indices.
struct IndexedMember {
    std::vector<std::size_t> idx;
    std::vector<double> probs;
};

std::vector<IndexedMember> index_members_on_lattice(const AmbiguityFamily& fam) {
    const auto& lat = *fam.lattice();
    std::vector<IndexedMember> out;
    out.reserve(fam.size());
    for (const auto& d : fam.members()) {
        IndexedMember m;
        m.probs = d.probs();
        m.idx.reserve(d.support_size());
        for (double v : d.values()) {
            double raw = (v - lat.offset) / lat.step;
            m.idx.push_back(static_cast<std::size_t>(std::llround(raw)));
        }
        out.push_back(std::move(m));
    }
    return out;
}

double eval_mean_dp(const AmbiguityFamily& fam, const TestFunction& phi, std::size_t n,
                    std::size_t max_states) {
    if (n == 0) throw std::invalid_argument("mean evaluation: n must be >= 1");
    if (!fam.lattice())
        throw UnsupportedFamilyError(
            "exact mean evaluation needs a common value lattice; use grid mode");

    const auto& lat = *fam.lattice();
    auto members = index_members_on_lattice(fam);
    std::size_t max_idx = 0;
    for (const auto& m : members)
        for (std::size_t i : m.idx) max_idx = std::max(max_idx, i);

    // Partial sum after k draws is k*offset + M*step with M in [0, k*max_idx].
    std::size_t width = n * max_idx + 1;
    if (width > max_states / (n + 1))
        throw ResourceLimitError("exact mean evaluation: lattice state space too large");

    std::vector<double> next(width), cur;
    for (std::size_t M = 0; M < width; ++M) {
        double sum = static_cast<double>(n) * lat.offset + static_cast<double>(M) * lat.step;
        next[M] = phi(sum / static_cast<double>(n));
    }

    for (std::size_t k = n; k-- > 0;) {
        std::size_t w = k * max_idx + 1;
        cur.assign(w, -std::numeric_limits<double>::infinity());
        for (std::size_t M = 0; M < w; ++M) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& m : members) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.idx.size(); ++i)
                    s += m.probs[i] * next[M + m.idx[i]];
                if (s > best) best = s;
            }
            cur[M] = best;
        }
        next.swap(cur);
    }
    return next[0];
}

} // namespace

double sublinear_expectation_mean(const AmbiguityFamily& fam, const TestFunction& phi,
                                  std::size_t n, std::size_t max_states) {
    return eval_mean_dp(fam, phi, n, max_states);
}

double lower_expectation_mean(const AmbiguityFamily& fam, const TestFunction& phi,
                              std::size_t n, std::size_t max_states) {
    return -eval_mean_dp(fam, phi.negated(), n, max_states);
}

GridEvalResult sublinear_expectation_mean_grid(const AmbiguityFamily& fam,
                                               const TestFunction& phi, std::size_t n,
                                               std::size_t grid_points) {
    if (n == 0) throw std::invalid_argument("mean evaluation: n must be >= 1");
    if (grid_points < 2) throw std::invalid_argument("grid evaluation: need >= 2 grid points");

    const double lo = fam.min_value(), hi = fam.max_value();
    const double lip_sum = phi.lip() / static_cast<double>(n); // slope in the sum variable
    const std::size_t G = grid_points;

    // Degenerate hull: every average equals lo, no interpolation needed.
    if (hi == lo) return {phi(lo), 0.0};

    auto layer_step = [&](std::size_t k) {
        return static_cast<double>(k) * (hi - lo) / static_cast<double>(G - 1);
    };

    std::vector<double> next(G), cur(G);
    for (std::size_t g = 0; g < G; ++g) {
        double sum = static_cast<double>(n) * lo + static_cast<double>(g) * layer_step(n);
        next[g] = phi(sum / static_cast<double>(n));
    }

    double err = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const double child_lo = static_cast<double>(k + 1) * lo;
        const double child_h = layer_step(k + 1);
        auto interp = [&](double s) {
            double t = (s - child_lo) / child_h;
            if (t <= 0.0) return next.front();
            if (t >= static_cast<double>(G - 1)) return next.back();
            std::size_t g = static_cast<std::size_t>(t);
            double frac = t - static_cast<double>(g);
            return next[g] + frac * (next[g + 1] - next[g]);
        };
        const double base = static_cast<double>(k) * lo;
        const double h = layer_step(k);
        const std::size_t w = (k == 0) ? 1 : G;
        for (std::size_t g = 0; g < w; ++g) {
            double sum = base + static_cast<double>(g) * h;
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& d : fam.members()) {
                double s = 0.0;
                const auto& vals = d.values();
                const auto& ps = d.probs();
                for (std::size_t i = 0; i < vals.size(); ++i)
                    s += ps[i] * interp(sum + vals[i]);
                if (s > best) best = s;
            }
            cur[g] = best;
        }
        err += lip_sum * child_h; // one interpolation per layer transition
        next.swap(cur);
    }
    return {next[0], err};
}

CoordFunction phi_of_mean(TestFunction phi) {
    return [phi = std::move(phi)](std::span<const double> xs) {
        NeumaierSum s;
        for (double x : xs) s.add(x);
        return phi(s.value() / static_cast<double>(xs.size()));
    };
}

namespace {

struct BruteForceCtx {
    const AmbiguityFamily& fam;
    const CoordFunction& f;
    std::size_t m;
    // Per member, the union-support slot of each support point, so sibling
    // subtrees are shared across members with common values.
    std::vector<std::vector<std::size_t>> slots;
    std::vector<double> history;

    double recurse(std::size_t depth) {
        if (depth == m) return f(std::span<const double>(history.data(), m));
        const auto& uni = fam.union_support();
        std::vector<double> child(uni.size());
        for (std::size_t u = 0; u < uni.size(); ++u) {
            history[depth] = uni[u];
            child[u] = recurse(depth + 1);
        }
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < fam.size(); ++j) {
            const auto& probs = fam.member(j).probs();
            double s = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * child[slots[j][i]];
            if (s > best) best = s;
        }
        return best;
    }
};

std::vector<std::vector<std::size_t>> union_slots(const AmbiguityFamily& fam) {
    const auto& uni = fam.union_support();
    std::vector<std::vector<std::size_t>> slots(fam.size());
    for (std::size_t j = 0; j < fam.size(); ++j) {
        for (double v : fam.member(j).values()) {
            auto it = std::lower_bound(uni.begin(), uni.end(), v - 1e-12);
            slots[j].push_back(static_cast<std::size_t>(it - uni.begin()));
        }
    }
    return slots;
}

void check_caps(const AmbiguityFamily& fam, std::size_t m, const BruteForceCaps& caps) {
    if (m == 0) throw std::invalid_argument("general evaluation: m must be >= 1");
    if (m > caps.max_coords)
        throw ResourceLimitError("general evaluation: m exceeds max_coords");
    double paths = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        paths *= static_cast<double>(fam.union_support().size());
        if (paths > static_cast<double>(caps.max_paths))
            throw ResourceLimitError("general evaluation: path count exceeds max_paths");
    }
}

} // namespace

double sublinear_expectation_general(const AmbiguityFamily& fam, const CoordFunction& f,
                                     std::size_t m, const BruteForceCaps& caps) {
    check_caps(fam, m, caps);
    BruteForceCtx ctx{fam, f, m, union_slots(fam), std::vector<double>(m, 0.0)};
    return ctx.recurse(0);
}

double wlln_limit(const TestFunction& phi, double mu_lo, double mu_hi) {
    if (!(mu_lo <= mu_hi))
        throw std::invalid_argument("wlln_limit: need mu_lo <= mu_hi");
    double best = std::max(phi(mu_lo), phi(mu_hi));
    for (const auto& k : phi.knots())
        if (k.first > mu_lo && k.first < mu_hi) best = std::max(best, phi(k.first));
    return best;
}

double verify_iid_identity(const AmbiguityFamily& fam, const CoordFunction& f,
                           std::size_t m, const BruteForceCaps& caps) {
    if (m < 1) throw std::invalid_argument("identity check: m must be >= 1");
    double lhs = sublinear_expectation_general(fam, f, m, caps);
    // Collapse the last coordinate: g(h) maximizes the conditional mean of f
    // over members, pointwise in the prefix h.
    CoordFunction g = [&fam, &f, m](std::span<const double> prefix) {
        std::vector<double> buf(prefix.begin(), prefix.end());
        buf.push_back(0.0);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& d : fam.members()) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.support_size(); ++i) {
                buf[m - 1] = d.values()[i];
                s += d.probs()[i] * f(std::span<const double>(buf.data(), m));
            }
            if (s > best) best = s;
        }
        return best;
    };
    double rhs;
    if (m == 1) {
        rhs = g(std::span<const double>{});
    } else {
        rhs = sublinear_expectation_general(fam, g, m - 1, caps);
    }
    return std::abs(lhs - rhs);
}

namespace {

std::vector<std::size_t> argmax_indices(const std::vector<double>& vals, double tol) {
    double best = *std::max_element(vals.begin(), vals.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] >= best - tol) out.push_back(i);
    return out;
}

} // namespace

CovarianceCheck covariance_check(const AmbiguityFamily& first, const AmbiguityFamily& second,
                                 std::size_t max_policies) {
    constexpr double kTieTol = 1e-12;
    CovarianceCheck report;

    const int signs[4][2] = {{+1, +1}, {-1, -1}, {+1, -1}, {-1, +1}};
    for (const auto& sg : signs) {
        int s1 = sg[0], s2 = sg[1];

        // Second-step value is s2 * mean, independent of the observed draw,
        // so the adapted argmax set is the same at every history.
        std::vector<double> second_obj(second.size());
        for (std::size_t j = 0; j < second.size(); ++j)
            second_obj[j] = s2 * second.member(j).mean();
        auto second_arg = argmax_indices(second_obj, kTieTol);
        double second_best = *std::max_element(second_obj.begin(), second_obj.end());

        std::vector<double> first_obj(first.size());
        for (std::size_t j = 0; j < first.size(); ++j)
            first_obj[j] = s1 * first.member(j).mean() + second_best;
        auto first_arg = argmax_indices(first_obj, kTieTol);

        for (std::size_t j1 : first_arg) {
            const auto& d1 = first.member(j1);
            std::size_t points = d1.support_size();
            // Mixed-radix enumeration of the per-draw second-member choice.
            double combos = 1.0;
            for (std::size_t p = 0; p < points; ++p) combos *= static_cast<double>(second_arg.size());
            if (combos > static_cast<double>(max_policies)) {
                report.truncated = true;
                combos = static_cast<double>(max_policies);
            }
            for (std::size_t c = 0; c < static_cast<std::size_t>(combos); ++c) {
                CovarianceCheck::Maximizer mx;
                mx.s1 = s1;
                mx.s2 = s2;
                mx.first = j1;
                mx.second.resize(points);
                std::size_t rem = c;
                for (std::size_t p = 0; p < points; ++p) {
                    mx.second[p] = second_arg[rem % second_arg.size()];
                    rem /= second_arg.size();
                }
                NeumaierSum e_eta, e_prod;
                for (std::size_t p = 0; p < points; ++p) {
                    double x = d1.values()[p], px = d1.probs()[p];
                    double m2 = second.member(mx.second[p]).mean();
                    e_eta.add(px * m2);
                    e_prod.add(px * x * m2);
                }
                mx.e_xi = d1.mean();
                mx.e_eta = e_eta.value();
                mx.e_prod = e_prod.value();
                mx.gap = mx.e_prod - mx.e_xi * mx.e_eta;
                // Sum objectives forbid a positive gap, difference objectives
                // a negative one.
                double violation = (s1 * s2 > 0) ? mx.gap : -mx.gap;
                report.worst_violation = std::max(report.worst_violation, violation);
                report.maximizers.push_back(std::move(mx));
            }
        }
    }
    return report;
}

} // namespace llnlab
