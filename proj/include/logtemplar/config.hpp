#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logtemplar {

/// Which model backend answers template queries.
struct BackendDescriptor {
    enum class Kind { Oracle, NoisyOracle, Remote };

    Kind kind = Kind::Oracle;

    // Remote only.
    std::string endpoint;
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 0.0;  // 0 keeps remote answers reproducible
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds retry_initial_delay{1000};
    std::chrono::milliseconds min_request_interval{0};  // 0 = no rate limit

    // Noisy oracle only.
    double noise_rate = 0.0;

    uint64_t rng_seed = 0;
};

inline std::string to_string(BackendDescriptor::Kind kind) {
    switch (kind) {
        case BackendDescriptor::Kind::Oracle: return "oracle";
        case BackendDescriptor::Kind::NoisyOracle: return "noisy_oracle";
        case BackendDescriptor::Kind::Remote: return "remote";
    }
    return "oracle";
}

inline BackendDescriptor::Kind backend_kind_from_string(std::string_view name) {
    if (name == "oracle") return BackendDescriptor::Kind::Oracle;
    if (name == "noisy_oracle") return BackendDescriptor::Kind::NoisyOracle;
    if (name == "remote") return BackendDescriptor::Kind::Remote;
    throw std::invalid_argument("unknown backend kind: " + std::string(name));
}

/**
 * @brief Runtime knobs shared by every stage of the parser.
 *
 * `delimiters` is the character set used for tokenization. A ' ' member
 * stands for the whole whitespace class; whitespace delimiters are dropped
 * while every other delimiter survives as its own single-character token,
 * so rendered templates keep their punctuation.
 */
struct Config {
    std::string delimiters = " ,=:;()[]";
    int top_k_tokens = 3;        // coarse-cluster signature length
    int candidate_count = 32;    // K_s
    int demo_count = 3;          // k demonstrations per query
    double merge_threshold = 0.8;
    int wildcard_max_span = 5;   // max tokens one <*> may absorb
    double sample_fraction = 0.2;
    uint64_t rng_seed = 0;
    bool adaptive_updates = true;  // ablation switch: false -> cache updates never refine

    BackendDescriptor backend;

    // Empty strings select the built-in instruction / prompt layout.
    std::string instruction;
    std::string prompt_layout;

    void validate() const {
        if (delimiters.find(' ') == std::string::npos)
            throw std::invalid_argument("config: delimiters must include ' ' (whitespace class)");
        if (top_k_tokens < 1) throw std::invalid_argument("config: top_k_tokens must be positive");
        if (candidate_count < 1) throw std::invalid_argument("config: candidate_count must be positive");
        if (demo_count < 1) throw std::invalid_argument("config: demo_count must be positive");
        if (demo_count > candidate_count)
            throw std::invalid_argument("config: demo_count must not exceed candidate_count");
        if (!(merge_threshold > 0.0 && merge_threshold <= 1.0))
            throw std::invalid_argument("config: merge_threshold must be in (0,1]");
        if (wildcard_max_span < 1) throw std::invalid_argument("config: wildcard_max_span must be positive");
        if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
            throw std::invalid_argument("config: sample_fraction must be in (0,1]");
        if (backend.noise_rate < 0.0 || backend.noise_rate > 1.0)
            throw std::invalid_argument("config: noise_rate must be in [0,1]");
        if (backend.max_retries < 0) throw std::invalid_argument("config: max_retries must be >= 0");
    }
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string unquote(std::string value) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        return value.substr(1, value.size() - 2);
    return value;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

}  // namespace detail

/**
 * Loads a flat key/value config file into `cfg`.
 *
 * Format: one `key = value` pair per line, `#` starts a comment, values may
 * be double-quoted (required when they contain leading/trailing spaces,
 * e.g. delimiters). Unknown keys are rejected with the offending line number.
 */
inline void load_config_file(const std::string& path, Config& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim_copy(line);
        if (stripped.empty()) continue;

        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim_copy(stripped.substr(0, eq));
        const std::string value = detail::unquote(detail::trim_copy(stripped.substr(eq + 1)));

        auto as_int = [&](auto& field) { field = static_cast<std::remove_reference_t<decltype(field)>>(std::stoll(value)); };
        auto as_ms = [&](std::chrono::milliseconds& field) { field = std::chrono::milliseconds(std::stoll(value)); };

        bool known = true;
        try {
            if (key == "delimiters") cfg.delimiters = value;
            else if (key == "top_k_tokens") as_int(cfg.top_k_tokens);
            else if (key == "candidate_count") as_int(cfg.candidate_count);
            else if (key == "demo_count") as_int(cfg.demo_count);
            else if (key == "merge_threshold") cfg.merge_threshold = std::stod(value);
            else if (key == "wildcard_max_span") as_int(cfg.wildcard_max_span);
            else if (key == "sample_fraction") cfg.sample_fraction = std::stod(value);
            else if (key == "rng_seed") cfg.rng_seed = std::stoull(value);
            else if (key == "adaptive_updates") cfg.adaptive_updates = (value == "true" || value == "1");
            else if (key == "backend") cfg.backend.kind = backend_kind_from_string(value);
            else if (key == "endpoint") cfg.backend.endpoint = value;
            else if (key == "model") cfg.backend.model_name = value;
            else if (key == "temperature") cfg.backend.temperature = std::stod(value);
            else if (key == "timeout_ms") as_ms(cfg.backend.timeout);
            else if (key == "max_retries") as_int(cfg.backend.max_retries);
            else if (key == "retry_initial_delay_ms") as_ms(cfg.backend.retry_initial_delay);
            else if (key == "min_request_interval_ms") as_ms(cfg.backend.min_request_interval);
            else if (key == "noise_rate") cfg.backend.noise_rate = std::stod(value);
            else if (key == "instruction_file") cfg.instruction = detail::read_file(value);
            else if (key == "prompt_layout_file") cfg.prompt_layout = detail::read_file(value);
            else known = false;
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for '" + key +
                                     "': " + e.what());
        }
        if (!known)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

/// Serializes cfg in the same key/value format load_config_file accepts.
inline std::string dump_config(const Config& cfg) {
    std::ostringstream out;
    out << "delimiters = \"" << cfg.delimiters << "\"\n"
        << "top_k_tokens = " << cfg.top_k_tokens << '\n'
        << "candidate_count = " << cfg.candidate_count << '\n'
        << "demo_count = " << cfg.demo_count << '\n'
        << "merge_threshold = " << cfg.merge_threshold << '\n'
        << "wildcard_max_span = " << cfg.wildcard_max_span << '\n'
        << "sample_fraction = " << cfg.sample_fraction << '\n'
        << "rng_seed = " << cfg.rng_seed << '\n'
        << "adaptive_updates = " << (cfg.adaptive_updates ? "true" : "false") << '\n'
        << "backend = " << to_string(cfg.backend.kind) << '\n'
        << "model = " << cfg.backend.model_name << '\n'
        << "temperature = " << cfg.backend.temperature << '\n'
        << "noise_rate = " << cfg.backend.noise_rate << '\n';
    if (!cfg.backend.endpoint.empty()) out << "endpoint = " << cfg.backend.endpoint << '\n';
    return out.str();
}

}  // namespace logtemplar
