#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qkd/keyrate.hpp"
#include "qkd/session.hpp"

namespace qkd::config {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs for the bias optimizer subcommand.
struct OptimizeParams {
    std::uint64_t n_total = 30000000;
    double e_bx = 0.054;
    double e_bz = 0.012;
    double f_x = 1.31;
    double f_z = 1.59;
    double grid_step = 0.005;
    bool split_search = true;
};

/// Everything a run needs, parsed from a flat sectioned key=value file.
/// Unknown sections or keys are errors; every key has a documented default
/// (see serialize()).
struct RunConfig {
    session::SessionConfig session;
    OptimizeParams optimize;
    std::string transport = "inprocess"; ///< "inprocess" or "socket"
};

enum class DefaultsPolicy {
    Allow,  ///< unset keys take their defaults
    Require ///< every key must appear; missing keys are listed in the error
};

RunConfig parse_config(const std::string& text, DefaultsPolicy policy,
                       const std::string& origin);
RunConfig load_config(const std::string& path, DefaultsPolicy policy = DefaultsPolicy::Allow);

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

/// FNV-1a over the canonical form; embedded in every output file.
std::uint64_t config_digest(const RunConfig& cfg);

} // namespace qkd::config
