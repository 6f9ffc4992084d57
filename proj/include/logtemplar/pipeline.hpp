#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <span>
#include <utility>

#include "logtemplar/cache.hpp"
#include "logtemplar/core.hpp"
#include "logtemplar/llm.hpp"
#include "logtemplar/prompt.hpp"
#include "logtemplar/sampler.hpp"
#include "logtemplar/selector.hpp"

namespace logtemplar {

/// Everything a parsing run produces: one template id per input line, the
/// final cache state and the query accounting.
struct ParseRun {
    std::map<size_t, int> assignments;  // line_id -> template_id
    CacheTree cache;
    QueryStatsSnapshot stats;
    uint64_t fallbacks = 0;
    std::chrono::microseconds cache_time{0};  // match + update
    std::chrono::microseconds query_time{0};  // backend round trips
    std::map<int, int> unified;               // retired id -> surviving id

    /// Follows unification links so retired assignment ids still resolve to
    /// a template present in the final cache.
    int resolve(int template_id) const {
        auto it = unified.find(template_id);
        while (it != unified.end()) {
            template_id = it->second;
            it = unified.find(template_id);
        }
        return template_id;
    }
};

/// Emitted once per processed record, in input order. Lets callers trace
/// cache behavior without re-running matches.
struct ParseEvent {
    const LogRecord* record = nullptr;
    bool hit = false;
    bool fallback = false;
    std::optional<UpdateResult::Action> action;  // set on miss without fallback
    int template_id = 0;
    std::optional<std::string> generated;  // extracted template rendering
};

using ParseObserver = std::function<void(const ParseEvent&)>;

/**
 * @brief The per-message parsing loop.
 *
 * Each record is tokenized and matched against the cache. A hit assigns the
 * matched template id directly. On a miss the selector picks demo_count
 * demonstrations, the prompt is built and sent to the backend, the reply is
 * parsed into a template, and the cache update (insert or refine against
 * the miss's relevant templates) yields the assigned id. A refine keeps the
 * refined template's id, so earlier assignments stay valid and groups merge
 * without relabeling.
 *
 * A malformed reply or a backend error that survived the backend's own
 * retries degrades to a fallback: the message's own token list is inserted
 * verbatim as an all-constant template. Only dataset-level problems (empty
 * content) abort the run.
 *
 * Records are processed strictly in input order; the cache has a single
 * writer, which also keeps query counts deterministic under mock backends.
 */
inline ParseRun parse_stream(std::span<const LogRecord> records, const CandidateSet& pool,
                             const Config& cfg, Backend& backend, CacheTree warm_cache = CacheTree{},
                             const ParseObserver& observer = {}) {
    using clock = std::chrono::steady_clock;
    auto as_us = [](clock::duration d) { return std::chrono::duration_cast<std::chrono::microseconds>(d); };

    ParseRun run;
    run.cache = std::move(warm_cache);
    const QueryStatsSnapshot start_stats = backend.stats();

    for (const LogRecord& record : records) {
        const auto tokens = tokenize(record.content, cfg.delimiters);
        if (tokens.empty())
            throw std::invalid_argument("record " + std::to_string(record.line_id) +
                                        ": content is empty after tokenization");

        const auto match_start = clock::now();
        const MatchOutcome outcome = run.cache.match(tokens, cfg);
        run.cache_time += as_us(clock::now() - match_start);

        if (outcome.is_hit()) {
            run.assignments[record.line_id] = outcome.hit->template_id;
            if (observer)
                observer(ParseEvent{&record, true, false, std::nullopt, outcome.hit->template_id, {}});
            continue;
        }

        std::optional<Template> generated;
        const auto demos = select_demos(record.content, pool, cfg.demo_count, cfg);
        const Prompt prompt = build_prompt(record.content, demos, cfg);
        try {
            const auto query_start = clock::now();
            const std::string reply = backend.complete(prompt, record);
            run.query_time += as_us(clock::now() - query_start);
            generated = extract_template(reply, cfg);
        } catch (const BackendError&) {
            generated.reset();  // degrade to fallback below
        }

        const auto update_start = clock::now();
        int assigned;
        std::optional<UpdateResult::Action> action;
        if (generated) {
            const UpdateResult result = run.cache.update(*generated, outcome.relevant, cfg);
            if (result.unified_from) run.unified[*result.unified_from] = result.template_id;
            assigned = result.template_id;
            action = result.action;
        } else {
            assigned = run.cache.insert(Template::parse(record.content, cfg.delimiters));
            ++run.fallbacks;
        }
        run.cache_time += as_us(clock::now() - update_start);
        run.assignments[record.line_id] = assigned;
        if (observer) {
            ParseEvent event{&record, false, !generated, action, assigned, {}};
            if (generated) event.generated = generated->raw();
            observer(event);
        }
    }

    run.stats = backend.stats() - start_stats;
    return run;
}

inline uint64_t query_count(const ParseRun& run) { return run.stats.total_queries; }

}  // namespace logtemplar
