#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "maczac/electronics.hpp"
#include "maczac/session.hpp"

namespace maczac {

/// Parameters of one command-line run.
struct RunConfig {
    SessionConfig session;
    DacConfig dac;
    std::uint64_t seed = 1;
    double char_rate_hz = 140e3;   // detection rate of the characterisation setup
    double char_duration = 60.0;   // s
    double histogram_bin = 10e-12; // s

    void validate() const;
};

/// Sets one `key = value` entry. Throws ConfigError for unknown keys and
/// unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key=value` (as given on the command line).
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Reads a flat `key = value` file. Blank lines and text after `#` are
/// ignored.
void load_config(RunConfig& cfg, std::istream& is);
RunConfig load_config_file(const std::string& path);

/// Writes every key with its current value, in a form load_config accepts.
void write_config(std::ostream& os, const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace maczac
