#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace llnlab {

/// Run provenance: everything needed to reproduce the outputs byte-for-byte
/// (minus wall-clock).  Written after all other outputs, atomically.
struct RunManifest {
    std::string subcommand;
    nlohmann::json resolved_config = nlohmann::json::object();
    nlohmann::json flag_overrides = nlohmann::json::object(); // flag vs file values
    std::uint64_t seed = 0;
    nlohmann::json input_digests = nlohmann::json::object(); // path -> content digest
    std::vector<std::string> outputs;
    double wall_ms = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& m);

/// Digest of a file's raw bytes; IoError when unreadable.
std::string file_digest(const std::filesystem::path& path);

/// Serialize and write atomically to `path`.
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

} // namespace llnlab
