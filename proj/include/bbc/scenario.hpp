#pragma once

// Scenario configuration: one flat declarative file of `key = value`
// lines mirroring the Scenario fields one-to-one. Unknown keys are hard
// errors; configuration mistakes must never turn into silently different
// experiments.

#include <sstream>

#include "bbc/consensus.hpp"

namespace bbc {

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

enum class AdversaryMode : uint8_t { Honest = 0, ForgeSignature, InflateClaim, Replay, Drop };

inline const char* to_string(AdversaryMode m) {
    switch (m) {
        case AdversaryMode::Honest: return "honest";
        case AdversaryMode::ForgeSignature: return "forge_signature";
        case AdversaryMode::InflateClaim: return "inflate_claim";
        case AdversaryMode::Replay: return "replay";
        case AdversaryMode::Drop: return "drop";
    }
    return "?";
}

inline AdversaryMode adversary_mode_from_string(std::string_view s) {
    if (s == "forge_signature") return AdversaryMode::ForgeSignature;
    if (s == "inflate_claim") return AdversaryMode::InflateClaim;
    if (s == "replay") return AdversaryMode::Replay;
    if (s == "drop") return AdversaryMode::Drop;
    throw ConfigError("unknown adversary mode '" + std::string(s) + "'");
}

struct AdversaryAssignment {
    AdversaryMode mode = AdversaryMode::Honest;
    uint32_t count = 0;
};

struct Scenario {
    uint64_t seed = 1;
    uint32_t n_vehicles = 10;
    uint32_t n_infra = 2;
    double road_length = 2000.0;   // meters of ring road
    double radio_range = 1200.0;   // meters
    uint32_t rounds = 50;
    uint32_t latency_min = 0;      // ticks
    uint32_t latency_max = 3;      // ticks
    std::vector<AdversaryAssignment> adversaries;
    double match_threshold = 0.85;
    uint64_t activity_window = kDefaultActivityWindow;
    double drop_probability = 0.0;  // uniform message loss, off by default

    uint32_t adversary_total() const {
        uint32_t n = 0;
        for (const auto& a : adversaries) n += a.count;
        return n;
    }

    void validate() const {
        if (n_vehicles == 0) throw ConfigError("n_vehicles must be positive");
        if (road_length <= 0.0) throw ConfigError("road_length must be positive");
        if (radio_range <= 0.0) throw ConfigError("radio_range must be positive");
        if (rounds == 0) throw ConfigError("rounds must be positive");
        if (latency_min > latency_max)
            throw ConfigError("latency_min must not exceed latency_max");
        if (match_threshold <= 0.0 || match_threshold >= 1.0)
            throw ConfigError("match_threshold must lie in (0, 1)");
        if (activity_window == 0) throw ConfigError("activity_window must be positive");
        if (drop_probability < 0.0 || drop_probability >= 1.0)
            throw ConfigError("drop_probability must lie in [0, 1)");
        if (adversary_total() >= n_vehicles)
            throw ConfigError("adversaries must number fewer than n_vehicles");
    }
};

struct RunConfig {
    Scenario scenario;
    std::string out_dir;
    int verbosity = 1;
    std::string golden;  // optional directory of expected outputs
};

namespace detail {
inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double_field(const std::string& key, const std::string& value) {
    size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &consumed);
    } catch (const std::exception&) {
        throw ConfigError("invalid value for " + key + ": '" + value + "'");
    }
    if (consumed != value.size())
        throw ConfigError("invalid value for " + key + ": '" + value + "'");
    return v;
}

inline uint64_t parse_uint_field(const std::string& key, const std::string& value) {
    try {
        return parse_u64(value);
    } catch (const Error&) {
        throw ConfigError("invalid value for " + key + ": '" + value + "'");
    }
}
}  // namespace detail

inline std::vector<AdversaryAssignment> parse_adversaries(const std::string& value) {
    std::vector<AdversaryAssignment> out;
    if (value.empty() || value == "none") return out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = detail::trim(item);
        size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("adversaries entries must look like mode:count");
        AdversaryAssignment a;
        a.mode = adversary_mode_from_string(detail::trim(item.substr(0, colon)));
        a.count = static_cast<uint32_t>(
            detail::parse_uint_field("adversaries", detail::trim(item.substr(colon + 1))));
        out.push_back(a);
    }
    return out;
}

/// Parses a scenario config. Every key is checked against the known set
/// and may appear at most once.
inline RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(stripped.substr(0, eq));
        std::string value = detail::trim(stripped.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ConfigError("duplicate config key '" + key + "'");

        Scenario& s = config.scenario;
        if (key == "seed") s.seed = detail::parse_uint_field(key, value);
        else if (key == "n_vehicles")
            s.n_vehicles = static_cast<uint32_t>(detail::parse_uint_field(key, value));
        else if (key == "n_infra")
            s.n_infra = static_cast<uint32_t>(detail::parse_uint_field(key, value));
        else if (key == "road_length") s.road_length = detail::parse_double_field(key, value);
        else if (key == "radio_range") s.radio_range = detail::parse_double_field(key, value);
        else if (key == "rounds")
            s.rounds = static_cast<uint32_t>(detail::parse_uint_field(key, value));
        else if (key == "latency_min")
            s.latency_min = static_cast<uint32_t>(detail::parse_uint_field(key, value));
        else if (key == "latency_max")
            s.latency_max = static_cast<uint32_t>(detail::parse_uint_field(key, value));
        else if (key == "adversaries") s.adversaries = parse_adversaries(value);
        else if (key == "match_threshold")
            s.match_threshold = detail::parse_double_field(key, value);
        else if (key == "activity_window") s.activity_window = detail::parse_uint_field(key, value);
        else if (key == "drop_probability")
            s.drop_probability = detail::parse_double_field(key, value);
        else if (key == "out_dir") config.out_dir = value;
        else if (key == "verbosity")
            config.verbosity = static_cast<int>(detail::parse_uint_field(key, value));
        else if (key == "golden") config.golden = value;
        else
            throw ConfigError("unknown config key '" + key + "'");
    }
    config.scenario.validate();
    return config;
}

}  // namespace bbc
