#include "xlayer/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace xlayer {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& value)
{
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
    return out;
}

bool boolean(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError("bad value for " + key + ": '" + value + "' (expected true or false)");
}

} // namespace

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = {
        {"seed", "1", "master seed for map synthesis, identities and sampling"},
        {"path_loss_exponent", "3.0", "log-distance path-loss exponent, 1.5..6"},
        {"reference_distance_m", "1.0", "reference distance d0 in metres"},
        {"reference_loss_cdbm", "4000", "path loss at d0, centi-dB"},
        {"shadowing_sigma_cdbm", "400", "shadowing standard deviation, centi-dB"},
        {"toa_jitter_ns", "20", "uniform time-of-arrival jitter bound"},
        {"noise_floor_cdbm", "-9500", "readings at or below this are not reported"},
        {"sla", "centralized", "centralized | decentralized"},
        {"scheme", "cross-layer", "cross-layer | legacy | crypto-only | non-crypto"},
        {"zone_cache", "true", "reuse session keys inside an authenticated zone"},
        {"sqn_window", "32", "SQN acceptance span at the mobile"},
        {"epsilon", "0", "localization error range in cdBm; 0 calibrates from the map"},
        {"epsilon_headroom", "1.3", "multiplier applied to the calibrated 99th percentile"},
        {"k", "3", "neighbors in the k-NN match"},
        {"freshness_ns", "2000000000", "maximum age of the newest RSS reading"},
        {"half_open_capacity", "64", "pending challenges per verifier"},
        {"response_timeout_ns", "500000000", "half-open entry lifetime"},
        {"cache_ttl_ns", "3600000000000", "zone-cache entry lifetime"},
        {"cells_per_zone", "4", "consecutive cells grouped into one trusted zone"},
        {"orientations", "4", "receiver orientations surveyed per point"},
        {"samples_per_combo", "25", "survey samples per (point, orientation)"},
        {"subscribers", "16", "enrolled mobiles"},
        {"uplink_drop", "0", "loss probability for messages sent by a mobile"},
        {"downlink_drop", "0", "loss probability for messages sent to a mobile"},
        {"hop_delay_ns", "1000000", "latency of every hop"},
        {"calibration_queries", "2000", "legitimate queries used to calibrate epsilon"},
        {"map", "", "radio map file to load instead of synthesizing one"},
    };
    return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text)
{
    std::set<std::string> known;
    for (const ConfigKey& k : config_keys()) {
        known.insert(k.name);
    }
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (known.count(key) == 0) {
            throw ConfigError("unknown key '" + key + "'", line_no);
        }
        if (!out.emplace(key, value).second) {
            throw ConfigError("key '" + key + "' given twice", line_no);
        }
    }
    return out;
}

SlaMode parse_sla(const std::string& s)
{
    if (s == "centralized") {
        return SlaMode::Centralized;
    }
    if (s == "decentralized") {
        return SlaMode::Decentralized;
    }
    throw ConfigError("sla must be centralized or decentralized, got '" + s + "'");
}

AuthScheme parse_scheme(const std::string& s)
{
    for (AuthScheme a : {AuthScheme::CrossLayer, AuthScheme::LegacyBaseline, AuthScheme::CryptoOnly,
                         AuthScheme::NonCrypto}) {
        if (s == to_string(a)) {
            return a;
        }
    }
    throw ConfigError("unknown scheme '" + s + "'");
}

void apply_config(const std::map<std::string, std::string>& kv, RunConfig& cfg)
{
    try {
        apply_environment_keys(kv, cfg.world.env);
    } catch (const RadioError& e) {
        throw ConfigError(e.what());
    }
    ProtocolParams& p = cfg.world.protocol;
    WorldConfig& w = cfg.world;
    for (const auto& [key, value] : kv) {
        if (key == "sla") {
            p.sla = parse_sla(value);
        } else if (key == "scheme") {
            p.scheme = parse_scheme(value);
        } else if (key == "zone_cache") {
            p.zone_cache = boolean(key, value);
        } else if (key == "sqn_window") {
            p.sqn_window = number<std::uint32_t>(key, value);
        } else if (key == "epsilon") {
            p.epsilon = number<double>(key, value);
        } else if (key == "epsilon_headroom") {
            p.epsilon_headroom = number<double>(key, value);
        } else if (key == "k") {
            p.k = number<std::size_t>(key, value);
        } else if (key == "freshness_ns") {
            p.freshness_ns = number<std::uint64_t>(key, value);
        } else if (key == "half_open_capacity") {
            p.half_open_capacity = number<std::size_t>(key, value);
        } else if (key == "response_timeout_ns") {
            p.response_timeout_ns = number<std::uint64_t>(key, value);
        } else if (key == "cache_ttl_ns") {
            p.cache_ttl_ns = number<std::uint64_t>(key, value);
        } else if (key == "cells_per_zone") {
            w.cells_per_zone = number<std::size_t>(key, value);
        } else if (key == "orientations") {
            w.orientations = number<std::uint32_t>(key, value);
        } else if (key == "samples_per_combo") {
            w.samples_per_combo = number<std::uint32_t>(key, value);
        } else if (key == "subscribers") {
            w.subscribers = number<std::size_t>(key, value);
        } else if (key == "uplink_drop") {
            w.uplink_drop = number<double>(key, value);
        } else if (key == "downlink_drop") {
            w.downlink_drop = number<double>(key, value);
        } else if (key == "hop_delay_ns") {
            w.hop_delay_ns = number<std::uint64_t>(key, value);
        } else if (key == "calibration_queries") {
            w.calibration_queries = number<std::size_t>(key, value);
        } else if (key == "map") {
            if (value.empty()) {
                cfg.map_path.reset();
            } else {
                cfg.map_path = value;
            }
        }
    }
    validate(cfg);
}

void validate(const RunConfig& cfg)
{
    try {
        cfg.world.env.validate();
    } catch (const RadioError& e) {
        throw ConfigError(e.what());
    }
    const ProtocolParams& p = cfg.world.protocol;
    const WorldConfig& w = cfg.world;
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(p.sqn_window >= 1, "sqn_window must be at least 1");
    require(p.epsilon >= 0.0, "epsilon must be >= 0");
    require(p.epsilon_headroom > 0.0, "epsilon_headroom must be > 0");
    require(p.k >= 1, "k must be at least 1");
    require(p.freshness_ns > 0, "freshness_ns must be positive");
    require(p.half_open_capacity >= 1, "half_open_capacity must be at least 1");
    require(p.response_timeout_ns > 0, "response_timeout_ns must be positive");
    require(w.cells_per_zone >= 2, "cells_per_zone must be at least 2");
    require(w.orientations >= 1 && w.orientations <= kDefaultOrientations,
            "orientations must be in 1.." + std::to_string(kDefaultOrientations));
    require(w.samples_per_combo >= 1, "samples_per_combo must be at least 1");
    require(w.subscribers >= 1, "subscribers must be at least 1");
    require(w.uplink_drop >= 0.0 && w.uplink_drop <= 1.0, "uplink_drop must be in [0, 1]");
    require(w.downlink_drop >= 0.0 && w.downlink_drop <= 1.0, "downlink_drop must be in [0, 1]");
    require(w.calibration_queries >= 1, "calibration_queries must be at least 1");
}

RunConfig load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    RunConfig cfg;
    apply_config(parse_config_text(text.str()), cfg);
    return cfg;
}

void attach_radio_map(RunConfig& cfg)
{
    if (!cfg.map_path) {
        return;
    }
    cfg.world.radio_map = std::make_shared<const RadioMap>(load_radio_map(*cfg.map_path));
}

} // namespace xlayer
