#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "llnlab/distributions.hpp"
#include "llnlab/rng.hpp"
#include "llnlab/schedule.hpp"

namespace llnlab {

// Selection policies are the operational form of a candidate law over paths:
// at every step they pick the family member the next draw comes from, as a
// function of the realized history only.

/// Prefix functional feeding the targeted-limit policy.  Either an explicit
/// table over prefixes of length d, or a piecewise-constant rule applied to
/// the prefix average.  With clip=true, outputs are clamped into the family's
/// mean envelope; with clip=false an out-of-range output is an error.
struct PiFunction {
    struct TableEntry {
        std::vector<double> prefix;
        double value = 0.0;
    };
    std::size_t d = 1;
    std::vector<TableEntry> table;      // used when nonempty
    std::vector<double> avg_breaks;     // ascending thresholds on the prefix average
    std::vector<double> avg_values;     // size avg_breaks.size() + 1
    bool clip = true;

    /// Evaluate on a realized prefix (length d); table form matches values
    /// within 1e-9 per coordinate.
    double evaluate(std::span<const double> prefix) const;
};

struct ConstantPolicy {
    std::size_t member = 0;
};

/// Follows the mean-steering schedule for the target: emits the family's
/// hi-mean member whenever the schedule emits mu_hi, else the lo-mean member.
struct KappaTargetPolicy {
    double mu = 0.0;
};

/// Behaves as `base` for steps 1..d, then evaluates pi on the realized prefix
/// once and follows a fresh mean-steering schedule toward that value.
struct PiTargetPolicy {
    std::size_t d = 1;
    std::shared_ptr<const struct PolicySpecBox> base; // null: uniform mixture
    PiFunction pi;
};

struct StationaryBlockPolicy {
    std::vector<std::size_t> indices; // nonempty; period = size
};

/// Independent member choice each step; weights over members (empty: uniform).
/// Randomness comes from the policy's dedicated stream, never the path stream.
struct RandomMixturePolicy {
    std::vector<double> weights;
};

using PolicySpec = std::variant<ConstantPolicy, KappaTargetPolicy, PiTargetPolicy,
                                StationaryBlockPolicy, RandomMixturePolicy>;

/// Boxed spec so PiTargetPolicy can hold a base policy by value semantics.
struct PolicySpecBox {
    PolicySpec spec;
};

/// Stateful per-trial instantiation of a spec against a family.  Owns the
/// internal schedule state and the mixture stream; one instance per trial.
class PolicyRun {
public:
    PolicyRun(const PolicySpec& spec, const AmbiguityFamily& fam, RngStream mixture_stream);

    /// Member index for the next draw.  Requires step == |history| + 1;
    /// for the same prefix this always returns the same index.
    std::size_t select(std::span<const double> history, std::size_t step);

private:
    const AmbiguityFamily* fam_;
    PolicySpec spec_;
    RngStream stream_;
    std::optional<MeanSchedule> schedule_;      // kappa / pi tail
    std::unique_ptr<PolicyRun> base_;           // pi prefix
    std::optional<double> committed_pi_;
    std::vector<double> cumulative_weights_;    // mixture
};

/// Average of member means over one period of a stationary block.
double stationary_mean(const StationaryBlockPolicy& p, const AmbiguityFamily& fam);

/// Tagged-record form: {"kind": "constant"|"kappa"|"pi"|"block"|"mixture", ...}.
PolicySpec policy_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const PolicySpec& spec);

/// Standalone pi-function record: {"d", "table" | "avg_breaks"/"avg_values", "clip"}.
PiFunction pi_function_from_json(const nlohmann::json& j);
nlohmann::json pi_function_to_json(const PiFunction& pi);

} // namespace llnlab
