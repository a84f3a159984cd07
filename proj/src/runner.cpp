#include "llnlab/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <utility>
#include <vector>

#include "llnlab/config.hpp"
#include "llnlab/csv.hpp"
#include "llnlab/errors.hpp"
#include "llnlab/experiments.hpp"
#include "llnlab/manifest.hpp"
#include "llnlab/nested_eval.hpp"
#include "llnlab/numeric.hpp"
#include "llnlab/parallel.hpp"
#include "llnlab/policies.hpp"
#include "llnlab/sampler.hpp"
#include "llnlab/schedule.hpp"
#include "llnlab/svg.hpp"

namespace llnlab {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Create a single level; a missing parent is the caller's mistake, not ours
// to repair.
void ensure_out_dir(const fs::path& dir) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir))
            throw IoError("not a directory: " + dir.string());
        return;
    }
    fs::path parent = dir.parent_path();
    if (parent.empty()) parent = ".";
    if (!fs::exists(parent))
        throw IoError("cannot create " + dir.string() + ": parent directory missing");
    std::error_code ec;
    fs::create_directory(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

nlohmann::json policy_json_from_flag(const std::string& flag, nlohmann::json* digests) {
    std::size_t i = flag.find_first_not_of(" \t\r\n");
    if (i != std::string::npos && (flag[i] == '{' || flag[i] == '[')) {
        try {
            return nlohmann::json::parse(flag);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("policy: ") + e.what());
        }
    }
    if (digests) (*digests)[flag] = file_digest(flag);
    return load_json_file(flag);
}

struct PlotSpec {
    std::string x;
    std::vector<std::string> ys;
    bool log_x = false;
    bool log_y = false;
    std::string x_label;
    std::string y_label;
};

const std::map<std::string, PlotSpec>& plot_specs() {
    static const std::map<std::string, PlotSpec> specs = {
        {"rate", {"n", {"err"}, true, true, "n", "error"}},
        {"convergence", {"n", {"frac_exceed"}, true, false, "n", "fraction off target"}},
        {"envelope", {"n", {"avg_min", "avg_max"}, true, false, "n", "running average"}},
        {"sweep", {"mu", {"estimate", "phi_at_mu"}, false, false, "target mean", "value"}},
        {"targets", {"target", {"block_mean", "max_dev"}, false, false, "target", "value"}},
    };
    return specs;
}

bool parse_cell(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && end != nullptr && *end == '\0';
}

std::string render_curve_svg(const Curve& c, const PlotSpec& ps, const std::string& title) {
    auto col_of = [&](const std::string& want) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < c.columns.size(); ++i)
            if (c.columns[i] == want) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    std::ptrdiff_t xi = col_of(ps.x);
    if (xi < 0) return {};
    std::vector<SvgSeries> series;
    for (const std::string& yname : ps.ys) {
        std::ptrdiff_t yi = col_of(yname);
        if (yi < 0) continue;
        SvgSeries s;
        s.label = yname;
        bool ok = true;
        for (const auto& row : c.rows) {
            double x = 0.0, y = 0.0;
            if (!parse_cell(row[static_cast<std::size_t>(xi)], x) ||
                !parse_cell(row[static_cast<std::size_t>(yi)], y)) {
                ok = false;
                break;
            }
            s.xs.push_back(x);
            s.ys.push_back(y);
        }
        if (ok && !s.xs.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) return {};
    return render_line_plot(title + ": " + c.name, ps.x_label, ps.y_label, series, ps.log_x,
                            ps.log_y);
}

} // namespace

int run_eval(const EvalArgs& args) {
    if (args.n < 1) throw IoError("eval: n must be >= 1");
    AmbiguityFamily fam = parse_family(nlohmann::json(args.family), nullptr);
    TestFunction phi = parse_phi(nlohmann::json(args.phi), fam);
    if (args.mode == "exact") {
        double v = sublinear_expectation_mean(fam, phi, args.n);
        std::cout << "value " << format_double(v) << "\n";
    } else if (args.mode == "grid") {
        GridEvalResult r = sublinear_expectation_mean_grid(fam, phi, args.n, args.grid_points);
        std::cout << "value " << format_double(r.value) << "\n";
        std::cout << "error_bound " << format_double(r.error_bound) << "\n";
    } else {
        throw IoError("eval: mode must be 'exact' or 'grid'");
    }
    return kExitPass;
}

int run_schedule(const ScheduleArgs& args) {
    auto start = Clock::now();
    if (args.n < 1) throw IoError("schedule: n must be >= 1");
    MeanSchedule sched = [&] {
        try {
            return MeanSchedule(args.mu, args.mu_lo, args.mu_hi);
        } catch (const std::invalid_argument& e) {
            throw IoError(e.what());
        }
    }();
    Curve curve{"schedule", {"n", "kappa_n", "mu_n", "k_n", "l_n", "bound"}, {}};
    for (std::size_t i = 1; i <= args.n; ++i) {
        double kappa = sched.next();
        curve.rows.push_back({std::to_string(i), format_double(kappa), format_double(sched.mu_n()),
                              std::to_string(sched.k_count()), std::to_string(sched.l_count()),
                              format_double(sched.bound())});
    }
    std::string csv = curve_to_csv(curve);
    if (args.out.empty()) {
        std::cout << csv;
        return kExitPass;
    }
    write_text_atomic(args.out, csv);
    RunManifest m;
    m.subcommand = "schedule";
    m.resolved_config = {{"mu", args.mu},
                         {"mu_lo", args.mu_lo},
                         {"mu_hi", args.mu_hi},
                         {"n", args.n},
                         {"out", args.out}};
    m.outputs = {args.out};
    m.wall_ms = elapsed_ms(start);
    write_manifest(m, args.out + ".manifest.json");
    return kExitPass;
}

int run_simulate(const SimulateArgs& args) {
    auto start = Clock::now();
    if (args.out.empty()) throw IoError("simulate: --out is required");
    if (args.horizon < 1) throw IoError("simulate: horizon must be >= 1");
    if (args.trials < 1) throw IoError("simulate: trials must be >= 1");
    nlohmann::json digests = nlohmann::json::object();
    AmbiguityFamily fam = parse_family(nlohmann::json(args.family), &digests);
    nlohmann::json policy_json = policy_json_from_flag(args.policy, &digests);
    PolicySpec policy = [&] {
        try {
            return policy_from_json(policy_json);
        } catch (const std::invalid_argument& e) {
            throw IoError(std::string("policy: ") + e.what());
        }
    }();
    std::size_t burn = args.burn_in ? args.burn_in
                                    : std::max<std::size_t>(1, args.horizon / 10);
    if (burn >= args.horizon && args.horizon > 1)
        throw IoError("simulate: burn-in must be below the horizon");

    const std::vector<std::size_t> cps = log_checkpoints(args.horizon);
    unsigned threads = resolve_threads(args.threads);

    struct TrialOut {
        std::vector<double> cp_avgs;
        ClusterStats stats;
        double sup_abs = 0.0;
    };
    std::vector<TrialOut> outs(args.trials);
    std::vector<std::exception_ptr> errors(args.trials);
    parallel_for(args.trials, threads, [&](std::size_t t) {
        try {
            PathSample path = sample_path(fam, policy, args.horizon, args.seed, t);
            TrialOut& o = outs[t];
            o.cp_avgs.reserve(cps.size());
            for (std::size_t cp : cps) o.cp_avgs.push_back(path.running_avgs[cp - 1]);
            o.stats = cluster_stats(path, burn);
            o.sup_abs = path.sup_abs_avg;
        } catch (...) {
            errors[t] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    Curve curve{"simulate", {"trial", "n", "avg"}, {}};
    for (std::size_t t = 0; t < args.trials; ++t) {
        const TrialOut& o = outs[t];
        std::string ts = std::to_string(t);
        for (std::size_t i = 0; i < cps.size(); ++i)
            curve.rows.push_back({ts, std::to_string(cps[i]), format_double(o.cp_avgs[i])});
        curve.rows.push_back({ts, "final_avg", format_double(o.stats.final_avg)});
        curve.rows.push_back({ts, "tail_min", format_double(o.stats.tail_min)});
        curve.rows.push_back({ts, "tail_max", format_double(o.stats.tail_max)});
        curve.rows.push_back({ts, "sup_abs_avg", format_double(o.sup_abs)});
    }
    write_text_atomic(args.out, curve_to_csv(curve));

    RunManifest m;
    m.subcommand = "simulate";
    m.resolved_config = {{"family", args.family},
                         {"policy", policy_to_json(policy)},
                         {"horizon", args.horizon},
                         {"trials", args.trials},
                         {"seed", args.seed},
                         {"burn_in", burn},
                         {"out", args.out}};
    m.seed = args.seed;
    m.input_digests = digests;
    m.outputs = {args.out};
    m.wall_ms = elapsed_ms(start);
    write_manifest(m, args.out + ".manifest.json");
    std::cout << "wrote " << args.out << ": " << args.trials << " trials, horizon "
              << args.horizon << "\n";
    return kExitPass;
}

int run_experiment_cmd(const ExperimentArgs& args) {
    auto start = Clock::now();
    nlohmann::json file_values = nlohmann::json::object();
    nlohmann::json digests = nlohmann::json::object();
    if (!args.config_path.empty()) {
        digests[args.config_path] = file_digest(args.config_path);
        file_values = load_json_file(args.config_path);
    }

    nlohmann::json overrides = nlohmann::json::object();
    if (args.flag_values.is_object()) {
        for (const auto& [key, value] : args.flag_values.items()) {
            if (file_values.is_object() && file_values.contains(key) && file_values[key] != value)
                overrides[key] = {{"flag", value}, {"file", file_values[key]}};
            else
                overrides[key] = {{"flag", value}};
        }
    }
    nlohmann::json merged = merge_config(
        file_values, args.flag_values.is_object() ? args.flag_values : nlohmann::json::object());

    std::string name = args.name;
    if (name.empty() && merged.contains("name") && merged["name"].is_string())
        name = merged["name"].get<std::string>();
    if (name.empty())
        throw IoError("experiment: name required (--name or a \"name\" config key)");
    if (merged.contains("name") && merged["name"].is_string() &&
        merged["name"].get<std::string>() != name)
        throw IoError("experiment: --name disagrees with the config's \"name\"");
    merged["name"] = name;

    std::string out_dir_s = args.out_dir;
    if (out_dir_s.empty())
        if (const char* env = std::getenv("LLNLAB_OUT_DIR")) out_dir_s = env;
    if (out_dir_s.empty())
        throw IoError("experiment: output directory required (--out-dir or LLNLAB_OUT_DIR)");

    unsigned threads = resolve_threads(args.threads);
    ExperimentConfig cfg = experiment_config_from_json(name, merged, threads, &digests);
    ExperimentReport rep = [&] {
        try {
            return run_experiment(name, cfg);
        } catch (const std::invalid_argument& e) {
            throw IoError("experiment '" + name + "': " + e.what());
        }
    }();

    fs::path dir = out_dir_s;
    ensure_out_dir(dir);
    std::vector<std::string> outputs;
    write_text_atomic(dir / "report.json", rep.to_json().dump(2) + "\n");
    outputs.push_back("report.json");
    for (const Curve& c : rep.curves) {
        std::string fname = c.name + ".csv";
        write_text_atomic(dir / fname, curve_to_csv(c));
        outputs.push_back(fname);
    }
    for (const Curve& c : rep.curves) {
        auto it = plot_specs().find(c.name);
        if (it == plot_specs().end()) continue;
        std::string svg = render_curve_svg(c, it->second, name);
        if (svg.empty()) continue;
        std::string fname = c.name + ".svg";
        write_text_atomic(dir / fname, svg);
        outputs.push_back(fname);
    }

    RunManifest m;
    m.subcommand = "experiment";
    m.resolved_config = merged;
    m.flag_overrides = overrides;
    m.seed = cfg.seed;
    m.input_digests = digests;
    m.outputs = outputs;
    m.wall_ms = elapsed_ms(start);
    write_manifest(m, dir / "manifest.json");

    for (const Verdict& v : rep.verdicts)
        std::cout << (v.pass ? "[pass] " : "[FAIL] ") << v.name << ": " << v.detail << "\n";
    std::cout << "experiment " << name << ": " << (rep.pass() ? "PASS" : "FAIL")
              << " (report digest " << rep.digest() << ")\n";
    return rep.pass() ? kExitPass : kExitVerdictFail;
}

} // namespace llnlab
