#pragma once

#include <stdexcept>
#include <string>

namespace farloc {

/// Invalid construction parameters (space, benchmark, sweep).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A bounded subspace has no room for the requested block.
class CapacityExhausted : public std::runtime_error {
public:
    explicit CapacityExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Contract violation by the caller: stale or foreign handle, double free, bad ratio.
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

} // namespace farloc
