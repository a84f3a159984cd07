#pragma once

namespace llnlab {

inline constexpr const char* kToolName = "llnlab";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace llnlab
