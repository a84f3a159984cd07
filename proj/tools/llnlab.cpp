#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "llnlab/errors.hpp"
#include "llnlab/experiments.hpp"
#include "llnlab/runner.hpp"
#include "llnlab/version.hpp"

namespace {

std::string experiment_list() {
    std::string s;
    for (const auto& n : llnlab::experiment_names()) {
        if (!s.empty()) s += ", ";
        s += n;
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical-average limit laws under a finite ambiguity family: exact "
                 "evaluation, mean-steering schedules, policy simulation, and seeded "
                 "pass/fail experiments."};
    app.set_version_flag("--version", std::string(llnlab::kToolName) + " " +
                                          llnlab::kToolVersion);
    app.require_subcommand(1);

    llnlab::EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand(
        "eval", "Upper expectation of phi(average of n draws), exact or grid-interpolated");
    eval->add_option("--family", eval_args.family, "family file (JSON list of members)")
        ->required();
    eval->add_option("--phi", eval_args.phi,
                     "builtin (identity, neg-identity, abs-dev:c, tent:a,peak,b, "
                     "indicator-smoothed:a,b[,w]) or a knots file")
        ->required();
    eval->add_option("--n", eval_args.n, "number of draws averaged")->required();
    eval->add_option("--mode", eval_args.mode, "exact | grid (default exact)")
        ->check(CLI::IsMember({"exact", "grid"}));
    eval->add_option("--grid-points", eval_args.grid_points,
                     "points per layer in grid mode (default 4096)");

    llnlab::ScheduleArgs sched_args;
    CLI::App* sched = app.add_subcommand(
        "schedule", "Mean-steering schedule prefix as CSV (n, kappa_n, mu_n, k_n, l_n, bound)");
    sched->add_option("--mu", sched_args.mu, "target mean")->required();
    sched->add_option("--mu-lo", sched_args.mu_lo, "envelope lower mean")->required();
    sched->add_option("--mu-hi", sched_args.mu_hi, "envelope upper mean")->required();
    sched->add_option("--n", sched_args.n, "steps to emit")->required();
    sched->add_option("--out", sched_args.out,
                      "CSV path (default stdout; a manifest is written only with --out)");

    llnlab::SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Sample seeded paths under a selection policy; checkpointed CSV");
    sim->add_option("--family", sim_args.family, "family file (JSON list of members)")
        ->required();
    sim->add_option("--policy", sim_args.policy, "policy spec: inline JSON or a file path")
        ->required();
    sim->add_option("--horizon", sim_args.horizon, "path length (default 100000)");
    sim->add_option("--trials", sim_args.trials, "independent paths (default 100)");
    sim->add_option("--seed", sim_args.seed, "base seed (required; no wall-clock default)")
        ->required();
    sim->add_option("--burn-in", sim_args.burn_in,
                    "tail statistics start (default horizon/10)");
    sim->add_option("--out", sim_args.out, "trajectory CSV path")->required();
    sim->add_option("--threads", sim_args.threads,
                    "worker threads (default LLNLAB_THREADS or machine parallelism)");

    llnlab::ExperimentArgs exp_args;
    std::uint64_t exp_seed = 0;
    std::size_t exp_trials = 0;
    std::size_t exp_horizon = 0;
    CLI::App* exp = app.add_subcommand("experiment",
                                       "Run a named pass/fail experiment: " + experiment_list());
    exp->add_option("--name", exp_args.name, "experiment name (or a \"name\" config key)");
    exp->add_option("--config", exp_args.config_path, "JSON config file");
    CLI::Option* seed_opt =
        exp->add_option("--seed", exp_seed, "base seed (flag wins over the config file)");
    CLI::Option* trials_opt = exp->add_option("--trials", exp_trials, "trial count override");
    CLI::Option* horizon_opt = exp->add_option("--horizon", exp_horizon, "horizon override");
    exp->add_option("--out-dir", exp_args.out_dir,
                    "output directory (or LLNLAB_OUT_DIR); created if the parent exists");
    exp->add_option("--threads", exp_args.threads,
                    "worker threads (default LLNLAB_THREADS or machine parallelism)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : llnlab::kExitUsage;
    }

    try {
        if (eval->parsed()) return llnlab::run_eval(eval_args);
        if (sched->parsed()) return llnlab::run_schedule(sched_args);
        if (sim->parsed()) return llnlab::run_simulate(sim_args);
        if (exp->parsed()) {
            exp_args.flag_values = nlohmann::json::object();
            if (seed_opt->count() > 0) exp_args.flag_values["seed"] = exp_seed;
            if (trials_opt->count() > 0) exp_args.flag_values["trials"] = exp_trials;
            if (horizon_opt->count() > 0) exp_args.flag_values["horizon"] = exp_horizon;
            return llnlab::run_experiment_cmd(exp_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return llnlab::kExitUsage;
    }
    return llnlab::kExitUsage;
}
