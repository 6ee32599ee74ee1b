#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coinlens/csv.hpp"
#include "coinlens/time.hpp"
#include "coinlens/types.hpp"
#include "coinlens/version.hpp"

namespace coinlens {

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(data));
}

/// Provenance record for one CLI run: digests of everything read and
/// written plus the effective configuration. `run_digest` covers the
/// command, version, config, and the ordered content digests, but not file
/// paths or `generated_at`, so reruns with identical inputs, config, and
/// outputs carry the same digest wherever they land.
inline nlohmann::json make_manifest(std::string_view command,
                                    const std::vector<std::string>& input_paths,
                                    const nlohmann::json& config,
                                    const std::vector<std::string>& output_paths) {
    nlohmann::json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["inputs"] = nlohmann::json::array();
    for (const auto& p : input_paths) j["inputs"].push_back({{"path", p}, {"digest", file_digest(p)}});
    j["config"] = config;
    j["outputs"] = nlohmann::json::array();
    for (const auto& p : output_paths)
        j["outputs"].push_back({{"path", p}, {"digest", file_digest(p)}});

    nlohmann::json essence;
    essence["command"] = j["command"];
    essence["version"] = j["version"];
    essence["config"] = j["config"];
    essence["inputs"] = nlohmann::json::array();
    for (const auto& in : j["inputs"]) essence["inputs"].push_back(in["digest"]);
    essence["outputs"] = nlohmann::json::array();
    for (const auto& out : j["outputs"]) essence["outputs"].push_back(out["digest"]);
    j["run_digest"] = hex64(fnv1a64(essence.dump()));
    j["generated_at"] = format_timestamp(static_cast<Timestamp>(std::time(nullptr)));
    return j;
}

inline void write_manifest(const std::string& path, const nlohmann::json& manifest) {
    csv::write_file(path, manifest.dump(2) + "\n");
}

} // namespace coinlens
