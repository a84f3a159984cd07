#include "llnlab/config.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "llnlab/errors.hpp"
#include "llnlab/manifest.hpp"
#include "llnlab/policies.hpp"

namespace llnlab {

nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config file " + path.string() + ": " + e.what());
    }
    return j;
}

void check_keys(const nlohmann::json& cfg, const KeySchema& schema, const std::string& what) {
    if (!cfg.is_object())
        throw IoError(what + ": expected a JSON object");
    std::string unknown;
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        if (!schema.allowed.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty())
        throw IoError(what + ": unknown keys: " + unknown);
    std::string missing;
    for (const auto& key : schema.required) {
        if (!cfg.contains(key)) {
            if (!missing.empty()) missing += ", ";
            missing += key;
        }
    }
    if (!missing.empty())
        throw IoError(what + ": missing required keys: " + missing);
}

nlohmann::json merge_config(const nlohmann::json& file_values, const nlohmann::json& flag_values) {
    nlohmann::json merged = file_values.is_null() ? nlohmann::json::object() : file_values;
    if (!merged.is_object())
        throw IoError("config: expected a JSON object at the top level");
    for (const auto& [key, value] : flag_values.items()) merged[key] = value;
    return merged;
}

namespace {

std::vector<double> parse_args_list(const std::string& args, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= args.size()) {
        std::size_t comma = args.find(',', pos);
        std::string tok = args.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw IoError(what + ": cannot parse number '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

TestFunction phi_from_builtin(const std::string& spec, const AmbiguityFamily& fam) {
    std::string name = spec;
    std::string args;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        args = spec.substr(colon + 1);
    }
    double lo = fam.min_value(), hi = fam.max_value();
    if (name == "identity") return TestFunction::identity(lo, hi);
    if (name == "neg-identity") return TestFunction::identity(lo, hi).negated();
    if (name == "abs-dev") {
        auto a = parse_args_list(args, "abs-dev");
        if (a.size() != 1) throw IoError("abs-dev: expected abs-dev:c");
        return TestFunction::abs_dev(a[0], lo, hi);
    }
    if (name == "tent") {
        auto a = parse_args_list(args, "tent");
        if (a.size() != 3) throw IoError("tent: expected tent:a,peak,b");
        return TestFunction::tent(a[0], a[1], a[2]);
    }
    if (name == "indicator-smoothed") {
        auto a = parse_args_list(args, "indicator-smoothed");
        if (a.size() != 2 && a.size() != 3)
            throw IoError("indicator-smoothed: expected indicator-smoothed:a,b[,w]");
        double w = a.size() == 3 ? a[2]
                                 : (a[1] > a[0] ? (a[1] - a[0]) / 10.0
                                                : std::max(hi - lo, 1.0) / 10.0);
        return TestFunction::indicator_smoothed(a[0], a[1], w);
    }
    throw IoError("unknown phi builtin '" + name + "'");
}

TestFunction phi_from_knots_json(const nlohmann::json& j) {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j) {
        if (!k.is_array() || k.size() != 2)
            throw IoError("phi knots: rows are [x, y] pairs");
        knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    try {
        return TestFunction(std::move(knots));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("phi knots: ") + e.what());
    }
}

bool looks_like_builtin(const std::string& s) {
    static const char* names[] = {"identity", "neg-identity", "abs-dev", "tent",
                                  "indicator-smoothed"};
    for (const char* n : names) {
        if (s == n) return true;
        if (s.rfind(std::string(n) + ":", 0) == 0) return true;
    }
    return false;
}

} // namespace

TestFunction parse_phi(const nlohmann::json& spec, const AmbiguityFamily& fam) {
    if (spec.is_array()) return phi_from_knots_json(spec);
    if (spec.is_string()) {
        std::string s = spec.get<std::string>();
        if (looks_like_builtin(s)) return phi_from_builtin(s, fam);
        return phi_from_knots_json(load_json_file(s));
    }
    throw IoError("phi: expected a builtin string, a knots file path, or a knots array");
}

AmbiguityFamily parse_family(const nlohmann::json& spec, nlohmann::json* digests) {
    if (spec.is_string()) {
        std::filesystem::path path = spec.get<std::string>();
        AmbiguityFamily fam = load_family(path);
        if (digests) (*digests)[path.string()] = file_digest(path);
        return fam;
    }
    return family_from_json(spec);
}

namespace {

const std::set<std::string> kCommonKeys = {"name",     "family",       "trials",
                                           "horizon",  "seed",         "eps_abs",
                                           "coverage_frac", "alpha",   "burn_in"};

std::map<std::string, KeySchema> build_schemas() {
    auto with = [](std::set<std::string> extra, std::set<std::string> required) {
        KeySchema s;
        s.allowed = kCommonKeys;
        s.allowed.insert(extra.begin(), extra.end());
        s.required = std::move(required);
        s.required.insert("seed");
        return s;
    };
    std::map<std::string, KeySchema> m;
    m["slln_bounds"] = with({"policy"}, {"family"});
    m["esti_bound"] = with({"mu", "epsilon", "n"}, {"family", "mu"});
    m["mu_attain"] = with({"mu"}, {"family", "mu"});
    m["mu_sweep"] = with({"mu_grid", "phi"}, {"family", "mu_grid"});
    m["wlln_rate"] = with({"n_grid", "phi"}, {"family"});
    m["pi_limit"] = with({"d", "pi", "base", "significance"}, {"family", "d", "pi"});
    m["stationary_means"] = with({"period", "target_grid"}, {"family"});
    m["bitstream_iid"] = KeySchema{{"name", "seed", "phis_per_m", "n_max"}, {"seed"}};
    m["noncompact_negative"] =
        KeySchema{{"name", "seed", "trials", "horizon", "cutoff", "mu"}, {"seed"}};
    return m;
}

} // namespace

const KeySchema& experiment_schema(const std::string& name) {
    static const std::map<std::string, KeySchema> schemas = build_schemas();
    auto it = schemas.find(name);
    if (it == schemas.end())
        throw IoError("unknown experiment '" + name + "'");
    return it->second;
}

ExperimentConfig experiment_config_from_json(const std::string& name, const nlohmann::json& cfg,
                                             unsigned threads, nlohmann::json* digests) {
    check_keys(cfg, experiment_schema(name), "experiment '" + name + "' config");
    ExperimentConfig out;
    out.threads = threads;
    try {
        if (cfg.contains("family")) out.family = parse_family(cfg["family"], digests);
        if (cfg.contains("trials")) out.trials = cfg["trials"].get<std::size_t>();
        if (cfg.contains("horizon")) out.horizon = cfg["horizon"].get<std::size_t>();
        if (cfg.contains("seed")) out.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("eps_abs")) out.eps_abs = cfg["eps_abs"].get<double>();
        if (cfg.contains("coverage_frac"))
            out.coverage_frac = cfg["coverage_frac"].get<double>();
        if (cfg.contains("alpha")) out.alpha = cfg["alpha"].get<double>();
        if (cfg.contains("burn_in")) out.burn_in = cfg["burn_in"].get<std::size_t>();
        if (cfg.contains("policy")) out.policy = policy_from_json(cfg["policy"]);
        if (cfg.contains("mu")) out.mu = cfg["mu"].get<double>();
        if (cfg.contains("epsilon")) out.epsilon = cfg["epsilon"].get<double>();
        if (cfg.contains("n")) out.n = cfg["n"].get<std::size_t>();
        if (cfg.contains("mu_grid")) out.mu_grid = cfg["mu_grid"].get<std::vector<double>>();
        if (cfg.contains("n_grid"))
            out.n_grid = cfg["n_grid"].get<std::vector<std::size_t>>();
        if (cfg.contains("phi") && out.family) out.phi = parse_phi(cfg["phi"], *out.family);
        if (cfg.contains("d")) out.d = cfg["d"].get<std::size_t>();
        if (cfg.contains("pi")) {
            nlohmann::json pj = cfg["pi"];
            if (pj.is_object() && !pj.contains("d") && cfg.contains("d")) pj["d"] = cfg["d"];
            out.pi = pi_function_from_json(pj);
        }
        if (cfg.contains("base")) out.base = policy_from_json(cfg["base"]);
        if (cfg.contains("significance")) out.significance = cfg["significance"].get<double>();
        if (cfg.contains("period")) out.period = cfg["period"].get<std::size_t>();
        if (cfg.contains("target_grid"))
            out.target_grid = cfg["target_grid"].get<std::vector<double>>();
        if (cfg.contains("phis_per_m"))
            out.phis_per_m = cfg["phis_per_m"].get<std::size_t>();
        if (cfg.contains("n_max")) out.n_max = cfg["n_max"].get<std::size_t>();
        if (cfg.contains("cutoff")) out.cutoff = cfg["cutoff"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("experiment '" + name + "' config: " + e.what());
    }
    return out;
}

} // namespace llnlab
