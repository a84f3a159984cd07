#include "llnlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "llnlab/numeric.hpp"

namespace llnlab {

SubsequenceGrid::SubsequenceGrid(double alpha, std::size_t horizon) : alpha_(alpha) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("subsequence grid: alpha must be > 1");
    if (horizon < 1)
        throw std::invalid_argument("subsequence grid: horizon must be >= 1");
    double p = alpha;
    for (;;) {
        auto e = static_cast<std::size_t>(std::floor(p));
        if (e > horizon) break;
        if (e >= 1 && (e_.empty() || e > e_.back())) e_.push_back(e);
        p *= alpha;
        if (p > 1e18) break;
    }
    if (e_.empty()) e_.push_back(1); // alpha close to 1: floor(alpha) == 1
}

std::size_t SubsequenceGrid::bracket(std::size_t n) const {
    if (n < e_.front())
        throw std::invalid_argument("subsequence grid: n precedes the first checkpoint");
    auto it = std::upper_bound(e_.begin(), e_.end(), n);
    return static_cast<std::size_t>(it - e_.begin()); // 1-based index of the last e <= n
}

double inverse_cdf_draw(const DiscreteDist& d, double u) {
    if (!(u >= 0.0 && u < 1.0))
        throw std::invalid_argument("inverse cdf: u must lie in [0, 1)");
    double cum = 0.0;
    const auto& probs = d.probs();
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return d.values()[i];
    }
    return d.values().back();
}

PathSample sample_path_with(const AmbiguityFamily& fam, const SelectFn& select,
                            std::size_t horizon, std::uint64_t seed, std::uint64_t trial) {
    if (horizon < 1)
        throw std::invalid_argument("sample path: horizon must be >= 1");
    PathSample out;
    out.draws.reserve(horizon);
    out.running_avgs.reserve(horizon);
    NeumaierSum sum;
    for (std::size_t k = 1; k <= horizon; ++k) {
        std::size_t member = select(std::span<const double>(out.draws), k);
        if (member >= fam.size())
            throw std::invalid_argument("sample path: policy returned an invalid member index");
        double u = u01(seed, trial, 0, k - 1);
        double x = inverse_cdf_draw(fam.member(member), u);
        out.draws.push_back(x);
        sum.add(x);
        double avg = sum.value() / static_cast<double>(k);
        out.running_avgs.push_back(avg);
        out.sup_abs_avg = std::max(out.sup_abs_avg, std::abs(avg));
    }
    return out;
}

PathSample sample_path(const AmbiguityFamily& fam, const PolicySpec& policy,
                       std::size_t horizon, std::uint64_t seed, std::uint64_t trial) {
    PolicyRun run(policy, fam, RngStream{seed, trial, 1, 0});
    return sample_path_with(
        fam,
        [&run](std::span<const double> history, std::size_t step) {
            return run.select(history, step);
        },
        horizon, seed, trial);
}

ClusterStats cluster_stats(const PathSample& path, std::size_t burn_in) {
    const std::size_t N = path.running_avgs.size();
    if (N == 0)
        throw std::invalid_argument("cluster stats: empty path");
    if (burn_in >= N)
        throw std::invalid_argument("cluster stats: burn_in must be < horizon");
    ClusterStats st;
    st.burn_in = burn_in;
    st.final_avg = path.running_avgs.back();
    st.tail_min = st.final_avg;
    st.tail_max = st.final_avg;
    // Tail covers 1-based n >= max(burn_in, 1).
    std::size_t first = burn_in == 0 ? 0 : burn_in - 1;
    for (std::size_t i = first; i < N; ++i) {
        st.tail_min = std::min(st.tail_min, path.running_avgs[i]);
        st.tail_max = std::max(st.tail_max, path.running_avgs[i]);
    }
    return st;
}

std::vector<std::size_t> log_checkpoints(std::size_t horizon, std::size_t points_per_decade) {
    if (horizon < 1) return {};
    if (points_per_decade < 1) points_per_decade = 1;
    std::vector<std::size_t> out;
    double decades = std::log10(static_cast<double>(horizon));
    auto total = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(points_per_decade)));
    out.push_back(1);
    for (std::size_t i = 1; i <= total; ++i) {
        double x = std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(total));
        auto n = static_cast<std::size_t>(std::llround(x));
        n = std::min(n, horizon);
        if (n > out.back()) out.push_back(n);
    }
    if (out.back() != horizon) out.push_back(horizon);
    return out;
}

} // namespace llnlab
