#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace llnlab {

// Exit codes shared by all subcommands.
inline constexpr int kExitPass = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitUsage = 2;

struct EvalArgs {
    std::string family;
    std::string phi;
    std::size_t n = 1;
    std::string mode = "exact"; // "exact" | "grid"
    std::size_t grid_points = 4096;
};

/// Prints "value <v>" and, in grid mode, "error_bound <b>".  No files.
int run_eval(const EvalArgs& args);

struct ScheduleArgs {
    double mu = 0.0;
    double mu_lo = 0.0;
    double mu_hi = 1.0;
    std::size_t n = 1;
    std::string out; // empty: CSV to stdout, no manifest
};

/// CSV columns n, kappa_n, mu_n, k_n, l_n, bound.
int run_schedule(const ScheduleArgs& args);

struct SimulateArgs {
    std::string family;      // family file path
    std::string policy;      // inline JSON or a file path
    std::size_t horizon = 100000;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0; // 0: horizon / 10
    std::string out;         // trajectory CSV path (required)
    unsigned threads = 0;    // 0: env / hardware
};

/// Checkpointed running averages plus per-trial summary rows, one CSV;
/// manifest written alongside as <out>.manifest.json.
int run_simulate(const SimulateArgs& args);

struct ExperimentArgs {
    std::string name;           // empty: take "name" from the config file
    std::string config_path;    // empty: flags only
    nlohmann::json flag_values; // config keys passed as flags (they win)
    std::string out_dir;        // empty: LLNLAB_OUT_DIR
    unsigned threads = 0;
};

/// Runs the named experiment and writes report.json, per-curve CSVs,
/// whitelisted SVG plots, then manifest.json last.  Verdict summary on
/// stdout; returns kExitPass iff every verdict passed.
int run_experiment_cmd(const ExperimentArgs& args);

} // namespace llnlab
