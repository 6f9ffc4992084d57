#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "logtemplar/cache.hpp"
#include "logtemplar/core.hpp"
#include "logtemplar/prompt.hpp"

namespace logtemplar {

inline constexpr const char* kApiKeyEnvVar = "LOGTEMPLAR_API_KEY";

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TimeoutError : BackendError {
    using BackendError::BackendError;
};
struct TransportError : BackendError {
    using BackendError::BackendError;
};
struct AuthError : BackendError {
    using BackendError::BackendError;
};
struct MissingGroundTruthError : BackendError {
    using BackendError::BackendError;
};

struct QueryStatsSnapshot {
    uint64_t total_queries = 0;
    uint64_t failures = 0;
    std::chrono::microseconds total_latency{0};

    QueryStatsSnapshot operator-(const QueryStatsSnapshot& other) const {
        return QueryStatsSnapshot{total_queries - other.total_queries, failures - other.failures,
                                  total_latency - other.total_latency};
    }
};

/// Monotone query counters; updates are atomic so concurrent complete()
/// calls on distinct prompts stay consistent.
class QueryStats {
public:
    void record(std::chrono::microseconds latency, bool failed) {
        queries_.fetch_add(1, std::memory_order_relaxed);
        if (failed) failures_.fetch_add(1, std::memory_order_relaxed);
        latency_us_.fetch_add(latency.count(), std::memory_order_relaxed);
    }

    QueryStatsSnapshot snapshot() const {
        return QueryStatsSnapshot{queries_.load(), failures_.load(),
                                  std::chrono::microseconds(latency_us_.load())};
    }

private:
    std::atomic<uint64_t> queries_{0};
    std::atomic<uint64_t> failures_{0};
    std::atomic<int64_t> latency_us_{0};
};

/**
 * @brief A pluggable template generator.
 *
 * complete() sends one prompt and returns the raw reply text; every call is
 * counted in stats() whether it succeeds or throws. The record travels with
 * the prompt so the offline oracle kinds can look up its ground truth — the
 * remote backend never reads it.
 */
class Backend {
public:
    virtual ~Backend() = default;

    std::string complete(const Prompt& prompt, const LogRecord& record) {
        const auto start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                                         start);
        };
        try {
            std::string reply = do_complete(prompt, record);
            stats_.record(elapsed(), false);
            return reply;
        } catch (...) {
            stats_.record(elapsed(), true);
            throw;
        }
    }

    QueryStatsSnapshot stats() const { return stats_.snapshot(); }

protected:
    virtual std::string do_complete(const Prompt& prompt, const LogRecord& record) = 0;

private:
    QueryStats stats_;
};

namespace detail {

inline std::string wrap_reply(const std::string& template_raw) {
    return "Log template: `" + template_raw + "`";
}

inline Template ground_truth_template(const LogRecord& record, const Config& cfg) {
    if (!record.ground_truth || tokenize(*record.ground_truth, cfg.delimiters).empty())
        throw MissingGroundTruthError("record " + std::to_string(record.line_id) +
                                      " carries no ground-truth template");
    return Template::parse(*record.ground_truth, cfg.delimiters);
}

}  // namespace detail

/// Answers every query with the record's ground-truth template, making the
/// pipeline verifiable offline.
class OracleBackend : public Backend {
public:
    explicit OracleBackend(Config cfg) : cfg_(std::move(cfg)) {}

protected:
    std::string do_complete(const Prompt&, const LogRecord& record) override {
        return detail::wrap_reply(detail::ground_truth_template(record, cfg_).raw());
    }

    Config cfg_;
};

/**
 * @brief The ground-truth oracle with seeded inconsistency.
 *
 * With probability noise_rate a reply re-concretizes exactly one wildcard
 * of the ground-truth template with the tokens it covers in the queried
 * message — the over-specific template the adaptive cache update exists to
 * repair. Templates without wildcards pass through clean.
 */
class NoisyOracleBackend : public Backend {
public:
    explicit NoisyOracleBackend(Config cfg)
        : cfg_(std::move(cfg)),
          rng_(cfg_.backend.rng_seed ^ 0x9e3779b97f4a7c15ull),
          noise_rate_(cfg_.backend.noise_rate) {}

protected:
    std::string do_complete(const Prompt&, const LogRecord& record) override {
        const Template truth = detail::ground_truth_template(record, cfg_);
        const double draw = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        if (draw >= noise_rate_ || !truth.has_wildcard()) return detail::wrap_reply(truth.raw());

        const auto message_tokens = tokenize(record.content, cfg_.delimiters);
        const auto spans = align_template(truth, message_tokens, cfg_.wildcard_max_span);
        if (!spans) return detail::wrap_reply(truth.raw());  // truth does not cover its own message

        const size_t corrupt_index = rng_() % spans->size();
        std::vector<Token> corrupted;
        size_t wildcard_index = 0;
        for (const auto& token : truth.tokens()) {
            if (!token.is_wildcard()) {
                corrupted.push_back(token);
                continue;
            }
            if (wildcard_index == corrupt_index)
                for (const auto& word : (*spans)[wildcard_index]) corrupted.push_back(Token::constant(word));
            else
                corrupted.push_back(token);
            ++wildcard_index;
        }
        return detail::wrap_reply(Template(std::move(corrupted)).raw());
    }

private:
    Config cfg_;
    std::mt19937_64 rng_;
    double noise_rate_;
};

/**
 * @brief Chat-completion client over HTTP(S).
 *
 * Sends the rendered prompt as a single user message with the configured
 * model name and temperature. Transient failures (connect/read errors, 408,
 * 429, 5xx) are retried with exponential backoff up to max_retries total
 * attempts; 401/403 aborts immediately with AuthError. Credentials come
 * from the LOGTEMPLAR_API_KEY environment variable.
 */
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(Config cfg) : cfg_(std::move(cfg)) {
        const char* key = std::getenv(kApiKeyEnvVar);
        if (!key || !*key)
            throw AuthError(std::string("remote backend requires ") + kApiKeyEnvVar);
        api_key_ = key;
        if (cfg_.backend.endpoint.empty())
            throw TransportError("remote backend requires an endpoint URL");
        split_endpoint(cfg_.backend.endpoint);
    }

protected:
    std::string do_complete(const Prompt& prompt, const LogRecord&) override {
        nlohmann::json body = {
            {"model", cfg_.backend.model_name},
            {"temperature", cfg_.backend.temperature},
            {"messages", {{{"role", "user"}, {"content", prompt.render()}}}},
        };
        const std::string payload = body.dump();
        debug_log("request", payload);

        const int attempts = std::max(1, cfg_.backend.max_retries);
        auto delay = cfg_.backend.retry_initial_delay;
        std::string last_error = "transport failure";
        bool timed_out = false;

        for (int attempt = 1; attempt <= attempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(delay);
                delay *= 2;
            }
            rate_limit();

            httplib::Client client(base_url_);
            const auto timeout = cfg_.backend.timeout;
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                const auto err = res.error();
                timed_out = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                             err == httplib::Error::Write);
                last_error = httplib::to_string(err);
                continue;
            }
            debug_log("response", res->body);
            if (res->status == 401 || res->status == 403)
                throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) + ")");
            if (res->status == 408 || res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                timed_out = (res->status == 408);
                continue;
            }
            if (res->status != 200)
                throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
            return parse_reply(res->body);
        }
        if (timed_out)
            throw TimeoutError("request timed out after " + std::to_string(attempts) + " attempts");
        throw TransportError(last_error + " after " + std::to_string(attempts) + " attempts");
    }

private:
    static std::string parse_reply(const std::string& body) {
        try {
            const auto json = nlohmann::json::parse(body);
            return json.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }

    void split_endpoint(const std::string& endpoint) {
        const auto scheme_end = endpoint.find("://");
        const size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        const auto path_begin = endpoint.find('/', host_begin);
        if (path_begin == std::string::npos) {
            base_url_ = endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_url_ = endpoint.substr(0, path_begin);
            path_ = endpoint.substr(path_begin);
        }
    }

    void rate_limit() {
        const auto interval = cfg_.backend.min_request_interval;
        if (interval.count() <= 0) return;
        std::lock_guard lock(rate_mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (last_request_ != std::chrono::steady_clock::time_point{} && now < last_request_ + interval)
            std::this_thread::sleep_for(last_request_ + interval - now);
        last_request_ = std::chrono::steady_clock::now();
    }

    void debug_log(const char* what, const std::string& body) const {
        if (!std::getenv("LOGTEMPLAR_DEBUG")) return;
        std::fprintf(stderr, "[remote %s] %s\n", what, body.c_str());  // key never enters the body
    }

    Config cfg_;
    std::string api_key_;
    std::string base_url_;
    std::string path_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

inline std::unique_ptr<Backend> make_backend(const Config& cfg) {
    switch (cfg.backend.kind) {
        case BackendDescriptor::Kind::Oracle: return std::make_unique<OracleBackend>(cfg);
        case BackendDescriptor::Kind::NoisyOracle: return std::make_unique<NoisyOracleBackend>(cfg);
        case BackendDescriptor::Kind::Remote: return std::make_unique<RemoteBackend>(cfg);
    }
    throw std::invalid_argument("unknown backend kind");
}

}  // namespace logtemplar
