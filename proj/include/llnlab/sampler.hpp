#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "llnlab/distributions.hpp"
#include "llnlab/policies.hpp"
#include "llnlab/rng.hpp"

namespace llnlab {

/// One simulated trajectory with its running averages.
struct PathSample {
    std::vector<double> draws;
    std::vector<double> running_avgs; // compensated partial sums / n
    double sup_abs_avg = 0.0;         // sup over n of |running average|
};

/// Tail extrema of the running average: finite-horizon stand-ins for the
/// limit inferior / superior of the sequence.
struct ClusterStats {
    std::size_t burn_in = 0;
    double tail_min = 0.0;
    double tail_max = 0.0;
    double final_avg = 0.0;
};

/// Checkpoints e_k = floor(alpha^k), alpha > 1, capped at the horizon, with
/// the bracketing map n -> s(n) satisfying e_{s} <= n < e_{s+1}.
class SubsequenceGrid {
public:
    SubsequenceGrid(double alpha, std::size_t horizon);

    double alpha() const { return alpha_; }
    const std::vector<std::size_t>& checkpoints() const { return e_; }

    /// Largest s (1-based into checkpoints) with e_s <= n; requires n >= e_1.
    std::size_t bracket(std::size_t n) const;

private:
    double alpha_;
    std::vector<std::size_t> e_;
};

/// Value at the minimal support index whose cumulative probability exceeds u.
double inverse_cdf_draw(const DiscreteDist& d, double u);

/// Member chooser for one step: arguments are (history, step).
using SelectFn = std::function<std::size_t(std::span<const double>, std::size_t)>;

/// Core path generator: at step k the member comes from `select`, the draw
/// from the channel-0 stream at index k-1.  Bit-for-bit reproducible from
/// (seed, trial) regardless of scheduling.
PathSample sample_path_with(const AmbiguityFamily& fam, const SelectFn& select,
                            std::size_t horizon, std::uint64_t seed, std::uint64_t trial);

/// Convenience wrapper: instantiate the policy spec (mixture randomness on
/// channel 1) and run it.
PathSample sample_path(const AmbiguityFamily& fam, const PolicySpec& policy,
                       std::size_t horizon, std::uint64_t seed, std::uint64_t trial);

/// Extrema of running_avgs over n >= burn_in (1-based; burn_in < horizon).
ClusterStats cluster_stats(const PathSample& path, std::size_t burn_in);

/// Log-spaced integer checkpoints 1..horizon (inclusive), ~points_per_decade
/// per factor of 10, deduplicated and sorted.
std::vector<std::size_t> log_checkpoints(std::size_t horizon, std::size_t points_per_decade = 8);

} // namespace llnlab
