#pragma once

// Plain-text run configuration: `key = value` lines, `#` comments.
// Command-line flags override file values.

#include "xlayer/protocol.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xlayer {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what)
        , line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct RunConfig {
    WorldConfig world;
    std::optional<std::filesystem::path> map_path;

    std::uint64_t seed() const { return world.env.seed; }
};

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

// Every recognized key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Parses `key = value` lines. Unknown keys, missing '=' and repeated keys are errors.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Applies parsed entries on top of `cfg` and validates the result.
void apply_config(const std::map<std::string, std::string>& kv, RunConfig& cfg);

RunConfig load_config_file(const std::filesystem::path& path);

SlaMode parse_sla(const std::string& s);
AuthScheme parse_scheme(const std::string& s);

// Throws ConfigError when a parameter is outside its domain.
void validate(const RunConfig& cfg);

// Loads the radio map named by map_path, when set, into world.radio_map.
void attach_radio_map(RunConfig& cfg);

} // namespace xlayer
