#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <string>

namespace casr {

constexpr const char* kToolName = "casr";
constexpr const char* kToolVersion = "0.1.0";

inline uint64_t fnv1a_hash(const std::string& s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Embedded in every output file. "timestamp" is the only field allowed to
// vary between identical runs; everything else is a pure function of the
// inputs, so artifacts are byte-identical once that key is masked.
struct Provenance {
    uint64_t config_hash = 0;
    std::optional<uint64_t> seed;
    std::map<std::string, std::string> algorithms;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["config_hash"] = config_hash;
        if (seed) j["seed"] = *seed;
        if (!algorithms.empty()) j["algorithms"] = algorithms;
        j["timestamp"] = now_iso8601();
        return j;
    }

    // single-line form for CSV/TSV/DOT comment headers
    std::string comment_line() const { return "# " + to_json().dump(); }
};

}  // namespace casr
