#pragma once

#include <stdexcept>
#include <string>

namespace llnlab {

/// Input files that cannot be read or parsed, and malformed output targets.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A request that is well formed but structurally outside what an algorithm
/// supports (e.g. exact evaluation on a family without a common value grid).
class UnsupportedFamilyError : public std::runtime_error {
public:
    explicit UnsupportedFamilyError(const std::string& what) : std::runtime_error(what) {}
};

/// A request whose exact cost exceeds a configured cap.  Deliberately distinct
/// from invalid_argument: the input is legal, just too large to honor.
class ResourceLimitError : public std::runtime_error {
public:
    explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace llnlab
