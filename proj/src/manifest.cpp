#include "llnlab/manifest.hpp"

#include <fstream>
#include <sstream>

#include "llnlab/csv.hpp"
#include "llnlab/errors.hpp"
#include "llnlab/numeric.hpp"
#include "llnlab/version.hpp"

namespace llnlab {

nlohmann::json manifest_to_json(const RunManifest& m) {
    return nlohmann::json{{"tool", kToolName},
                          {"version", kToolVersion},
                          {"subcommand", m.subcommand},
                          {"resolved_config", m.resolved_config},
                          {"flag_overrides", m.flag_overrides},
                          {"seed", m.seed},
                          {"input_digests", m.input_digests},
                          {"outputs", m.outputs},
                          {"wall_ms", m.wall_ms}};
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read for digest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a64(buf.str()));
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    write_text_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

} // namespace llnlab
