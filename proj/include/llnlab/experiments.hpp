#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "llnlab/distributions.hpp"
#include "llnlab/policies.hpp"
#include "llnlab/test_function.hpp"

namespace llnlab {

// Named, seeded, pass/fail experiments: each renders one limit statement as a
// finite-sample assertion with explicit tolerances.  Reports are
// self-contained (verdicts recomputable from recorded statistics) and
// bit-reproducible for a fixed config and seed at any parallelism degree.

/// Shared parameter bag.  Each experiment reads the subset it documents and
/// echoes exactly that subset into its report.
struct ExperimentConfig {
    std::optional<AmbiguityFamily> family; // absent: experiment default
    std::size_t trials = 100;
    std::size_t horizon = 100000;
    std::uint64_t seed = 0;
    double eps_abs = 0.02;
    double coverage_frac = 0.95;
    double alpha = 2.0;
    std::size_t burn_in = 0; // 0: horizon / 10
    unsigned threads = 1;

    // Experiment-specific knobs.
    PolicySpec policy = RandomMixturePolicy{};   // slln_bounds
    std::optional<double> mu;                    // esti_bound, mu_attain, noncompact target
    double epsilon = 0.1;                        // esti_bound deviation threshold
    std::size_t n = 64;                          // esti_bound evaluation length
    std::vector<double> mu_grid;                 // mu_sweep
    std::vector<std::size_t> n_grid;             // wlln_rate
    std::optional<TestFunction> phi;             // mu_sweep, wlln_rate
    std::size_t d = 1;                           // pi_limit
    std::optional<PiFunction> pi;                // pi_limit
    PolicySpec base = RandomMixturePolicy{};     // pi_limit prefix policy
    double significance = 1e-4;                  // pi_limit two-sample test
    std::size_t period = 20;                     // stationary_means
    std::vector<double> target_grid;             // stationary_means
    std::size_t phis_per_m = 20;                 // bitstream_iid
    std::size_t n_max = 10;                      // bitstream_iid
    std::size_t cutoff = 100;                    // noncompact
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Tabular companion data; cells are preformatted so emission is byte-stable.
struct Curve {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct ExperimentReport {
    std::string name;
    nlohmann::json config;     // resolved parameters the run actually used
    nlohmann::json aggregates; // statistics the verdicts are computed from
    std::vector<Verdict> verdicts;
    std::vector<Curve> curves;
    double wall_ms = 0.0;

    bool pass() const;
    /// Full report as JSON; curves appear as column lists plus row digests.
    nlohmann::json to_json() const;
    /// Content digest over to_json() with wall_ms removed.
    std::string digest() const;
};

ExperimentReport exp_slln_bounds(const ExperimentConfig& cfg);
ExperimentReport exp_esti_bound(const ExperimentConfig& cfg);
ExperimentReport exp_mu_attain(const ExperimentConfig& cfg);
ExperimentReport exp_mu_sweep(const ExperimentConfig& cfg);
ExperimentReport exp_wlln_rate(const ExperimentConfig& cfg);
ExperimentReport exp_pi_limit(const ExperimentConfig& cfg);
ExperimentReport exp_stationary_means(const ExperimentConfig& cfg);
ExperimentReport exp_bitstream_iid(const ExperimentConfig& cfg);
ExperimentReport exp_noncompact_negative(const ExperimentConfig& cfg);

/// Dispatch by name; invalid_argument for unknown names.
ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& cfg);
const std::vector<std::string>& experiment_names();

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t used = 0;     // points entering the fit
    std::size_t filtered = 0; // nonpositive errors dropped
};

/// Least-squares slope of log(err) against log(n); nonpositive errors are
/// filtered and counted.  Fewer than two usable points: invalid_argument.
RateFit fit_rate(std::span<const std::size_t> ns, std::span<const double> errs);

/// Default evaluation function over the family's value hull: a unit-slope
/// tent peaked at the midpoint of the mean envelope.
TestFunction default_phi(const AmbiguityFamily& fam);

} // namespace llnlab
