#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <json.hpp>

#include "llnlab/distributions.hpp"
#include "llnlab/experiments.hpp"
#include "llnlab/test_function.hpp"

namespace llnlab {

nlohmann::json load_json_file(const std::filesystem::path& path);

/// Key discipline for one config surface: reject unknown keys (listing them)
/// and missing required keys (naming them).
struct KeySchema {
    std::set<std::string> allowed;
    std::set<std::string> required;
};

void check_keys(const nlohmann::json& cfg, const KeySchema& schema, const std::string& what);

/// File values overlaid by flag values (flags win).  Both must be objects.
nlohmann::json merge_config(const nlohmann::json& file_values, const nlohmann::json& flag_values);

/// Accepted phi forms: builtin string ("identity", "neg-identity",
/// "abs-dev:c", "tent:a,peak,b", "indicator-smoothed:a,b[,w]"), a knots file
/// path, or an inline [[x, y], ...] array.  Builtins without explicit domain
/// arguments use the family's value hull.
TestFunction parse_phi(const nlohmann::json& spec, const AmbiguityFamily& fam);

/// Family from a path string or an inline JSON value.  When `digests` is
/// given and the spec is a path, the file digest is recorded under its path.
AmbiguityFamily parse_family(const nlohmann::json& spec, nlohmann::json* digests);

/// Schema for one experiment's config keys.
const KeySchema& experiment_schema(const std::string& name);

/// Build the typed config from validated JSON (family paths resolved,
/// policy/pi/phi specs parsed).  `threads` is carried separately (flag/env).
ExperimentConfig experiment_config_from_json(const std::string& name, const nlohmann::json& cfg,
                                             unsigned threads, nlohmann::json* digests);

} // namespace llnlab
