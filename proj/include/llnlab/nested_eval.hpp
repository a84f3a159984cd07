#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "llnlab/distributions.hpp"
#include "llnlab/test_function.hpp"

namespace llnlab {

// Upper expectations of path functionals under a finite family of candidate
// laws, where the adversary re-picks a member after every draw.  Values are
// computed by backward induction: at each step the conditional expectation is
// maximized over members, which realizes the worst case over all
// history-adapted selection rules.

/// Upper expectation of phi(average of n draws), exact.  Requires the family
/// to expose a common value lattice (UnsupportedFamilyError otherwise); state
/// is the integer-indexed partial sum.  ResourceLimitError when the state
/// space exceeds max_states.
double sublinear_expectation_mean(const AmbiguityFamily& fam, const TestFunction& phi,
                                  std::size_t n, std::size_t max_states = 200'000'000);

/// Lower expectation of phi(average), via -E[-phi].
double lower_expectation_mean(const AmbiguityFamily& fam, const TestFunction& phi,
                              std::size_t n, std::size_t max_states = 200'000'000);

struct GridEvalResult {
    double value = 0.0;
    /// Guaranteed bound on |value - exact|: one interpolation step per layer.
    double error_bound = 0.0;
};

/// Grid-interpolated variant for families without a usable lattice.  Each
/// layer k holds values on a uniform grid over the reachable sum range
/// [k * min, k * max]; layer-to-layer reads interpolate linearly.
GridEvalResult sublinear_expectation_mean_grid(const AmbiguityFamily& fam,
                                               const TestFunction& phi, std::size_t n,
                                               std::size_t grid_points = 4096);

/// Functional of the first m draws, in draw order.
using CoordFunction = std::function<double(std::span<const double>)>;

struct BruteForceCaps {
    std::size_t max_coords = 8;
    std::size_t max_paths = 10'000'000;
};

/// Upper expectation of a general m-coordinate functional by full-history
/// recursion over the union support.  Exponential in m: guarded by caps
/// (ResourceLimitError).  Serves as the oracle the mean-mode DP is checked
/// against.
double sublinear_expectation_general(const AmbiguityFamily& fam, const CoordFunction& f,
                                     std::size_t m, const BruteForceCaps& caps = {});

/// Wrap a univariate function as a functional of the running average.
CoordFunction phi_of_mean(TestFunction phi);

/// max of phi over [mu_lo, mu_hi]; attained at a knot or an endpoint.
double wlln_limit(const TestFunction& phi, double mu_lo, double mu_hi);

/// Consistency check of the one-step collapse: evaluating f on m coordinates
/// must match evaluating, on m-1 coordinates, the function obtained by
/// maximizing the last coordinate out.  Returns |difference|.
double verify_iid_identity(const AmbiguityFamily& fam, const CoordFunction& f,
                           std::size_t m, const BruteForceCaps& caps = {});

/// Enumeration of optimal two-step adapted selections for the four signed
/// objectives E[s1*xi + s2*eta], with per-maximizer product statistics.
/// Optimizers of the sum (s1*s2 = +1) must show E_P[xi*eta] <= E_P[xi]E_P[eta];
/// optimizers of a difference (s1*s2 = -1) the reverse inequality.
struct CovarianceCheck {
    struct Maximizer {
        int s1 = 1, s2 = 1;
        std::size_t first = 0;            ///< member of the first family
        std::vector<std::size_t> second;  ///< member of the second family per first-draw value
        double e_xi = 0.0, e_eta = 0.0, e_prod = 0.0;
        double gap = 0.0;                 ///< e_prod - e_xi * e_eta
    };
    std::vector<Maximizer> maximizers;
    double worst_violation = 0.0;  ///< max over maximizers of the forbidden side of the gap
    bool truncated = false;        ///< enumeration cap was hit
    bool pass(double tol = 1e-12) const { return !truncated && worst_violation <= tol; }
};

CovarianceCheck covariance_check(const AmbiguityFamily& first, const AmbiguityFamily& second,
                                 std::size_t max_policies = 4096);

} // namespace llnlab
