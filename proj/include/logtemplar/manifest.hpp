#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "logtemplar/config.hpp"
#include "logtemplar/pipeline.hpp"

namespace logtemplar {

inline constexpr std::string_view kVersion = "logtemplar 0.1.0";

/// FNV-1a 64-bit; stable across platforms, used for dataset/candidate
/// content hashes and the run fingerprint.
inline uint64_t fnv1a(std::string_view data) {
    uint64_t h = 14695981039346656037ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(data)));
    return std::string(buf);
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(data);
}

/**
 * @brief Reproducibility record written at the end of a run.
 *
 * The fingerprint hashes every deterministic component — config, input
 * hashes, backend descriptor, assignments, final cache, counters — so two
 * mock-backend runs with the same seed produce identical fingerprints.
 * Wall-clock timings sit next to it but never enter the hash. Secrets are
 * redacted: the manifest stores only whether an API key was present.
 */
struct RunManifest {
    Config config;
    std::string dataset_path, dataset_hash;
    std::string candidates_path, candidates_hash;
    uint64_t queries = 0, failures = 0, fallbacks = 0;
    std::chrono::milliseconds sampling_time{0};
    std::chrono::milliseconds cache_time{0};
    std::chrono::milliseconds query_time{0};
    std::chrono::milliseconds total_time{0};
    std::string assignments_hash;  // over the output CSV bytes
    std::string cache_hash;        // over the final cache snapshot

    std::string fingerprint() const {
        std::string blob = dump_config(config);
        blob += '\n';
        blob += dataset_hash;
        blob += '\n';
        blob += candidates_hash;
        blob += '\n';
        blob += assignments_hash;
        blob += '\n';
        blob += cache_hash;
        blob += '\n';
        blob += std::to_string(queries) + ":" + std::to_string(failures) + ":" + std::to_string(fallbacks);
        return fnv1a_hex(blob);
    }

    nlohmann::json to_json() const {
        const auto& b = config.backend;
        return nlohmann::json{
            {"version", std::string(kVersion)},
            {"config", nlohmann::json{{"delimiters", config.delimiters},
                                      {"top_k_tokens", config.top_k_tokens},
                                      {"candidate_count", config.candidate_count},
                                      {"demo_count", config.demo_count},
                                      {"merge_threshold", config.merge_threshold},
                                      {"wildcard_max_span", config.wildcard_max_span},
                                      {"sample_fraction", config.sample_fraction},
                                      {"rng_seed", config.rng_seed},
                                      {"adaptive_updates", config.adaptive_updates}}},
            {"backend", nlohmann::json{{"kind", to_string(b.kind)},
                                       {"model", b.model_name},
                                       {"endpoint", b.endpoint},
                                       {"temperature", b.temperature},
                                       {"noise_rate", b.noise_rate},
                                       {"rng_seed", b.rng_seed},
                                       {"api_key_present", std::getenv(kApiKeyEnvVar) != nullptr}}},
            {"dataset", nlohmann::json{{"path", dataset_path}, {"fnv1a", dataset_hash}}},
            {"candidates", nlohmann::json{{"path", candidates_path}, {"fnv1a", candidates_hash}}},
            {"counters",
             nlohmann::json{{"queries", queries}, {"failures", failures}, {"fallbacks", fallbacks}}},
            {"timings_ms", nlohmann::json{{"sampling", sampling_time.count()},
                                          {"cache_ops", cache_time.count()},
                                          {"query", query_time.count()},
                                          {"total", total_time.count()}}},
            {"outputs",
             nlohmann::json{{"assignments_fnv1a", assignments_hash}, {"cache_fnv1a", cache_hash}}},
            {"fingerprint", fingerprint()},
        };
    }
};

/// Atomic write: the document lands under a temporary name and is renamed
/// into place, so readers never observe a half-written manifest.
inline void write_manifest(const std::string& path, const RunManifest& manifest) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + tmp);
        out << manifest.to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::json load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    return nlohmann::json::parse(in);
}

/// One JSON object per line; the parse run appends its summary event.
inline void append_stats_line(const std::string& path, const nlohmann::json& event) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << event.dump() << '\n';
}

}  // namespace logtemplar
