// Seeded synthetic corpora shared by the pipeline tests and the acceptance
// suite: a parse corpus generated from 20 known templates, and a sampling
// corpus with a fixed 8x5 cluster layout.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "logtemplar/core.hpp"

namespace corpus {

// Template design notes (all values instantiable without delimiter chars):
// - single-wildcard templates have >= 5 tokens, so one re-concretized
//   wildcard still merges back at the 0.8 threshold;
// - the two templates whose parameter may span 2 tokens have >= 9 tokens;
// - double-wildcard templates have >= 10 tokens with constants between the
//   wildcards, covering the worst case of two different corrupted copies;
// - two templates are all-constant.
inline const std::vector<std::string> kParseTemplates = {
    "Connection from <*> closed by remote peer",
    "Failed password for invalid user <*> from origin <*> via sshd daemon",
    "Starting periodic compaction of region <*> now",
    "Received heartbeat from node <*> after <*> retries during sync window",
    "Block replication finished for volume <*> status clean",
    "Cache eviction removed <*> stale entries in shard <*> under pressure",
    "User session opened for account <*> via console",
    "Disk quota exceeded on mount <*> by process <*> during nightly backup",
    "Scheduler assigned task <*> to worker <*> queue with default priority",
    "Checkpoint completed in <*> milliseconds during shutdown",
    "Registry sync pulled manifest revision <*> successfully",
    "Thermal sensor reading stable within limits",
    "Watchdog timer reset by supervisor daemon",
    "Memory pool expanded to <*> pages for tenant <*> after allocation burst",
    "Query planner selected index <*> over <*> alternatives for join stage",
    "Replica <*> promoted to primary after election round <*> completed cleanly",
    "Firmware upgrade staged on device <*> slot <*> pending scheduled reboot",
    "Peer gossip digest sent to <*> endpoints during round <*> of exchange",
    "Snapshot export wrote archive <*> into cold storage overnight",
    "Audit trail flushed <*> records to collector without any errors",
};

// Indices of kParseTemplates whose single parameter may span two tokens.
inline const std::vector<size_t> kTwoTokenParamTemplates = {18, 19};

struct SyntheticCorpus {
    std::vector<logtemplar::LogRecord> records;
    std::vector<std::string> templates;  // canonical ground-truth renderings
};

// One parameter value; embeds the template index so values never collide
// across templates (and never equal a constant word).
inline std::vector<std::string> make_param(size_t template_idx, size_t wildcard_idx, bool two_tokens,
                                           std::mt19937_64& rng) {
    const auto r = rng() % 90000 + 10000;
    if (two_tokens)
        return {"bundle" + std::to_string(template_idx) + "q" + std::to_string(r),
                "part" + std::to_string(rng() % 900 + 100)};
    switch ((template_idx + wildcard_idx) % 4) {
        case 0: return {"u" + std::to_string(template_idx) + "x" + std::to_string(r)};
        case 1: return {"/srv/d" + std::to_string(template_idx) + "/f" + std::to_string(r)};
        case 2: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "0xt%zxv%llx", template_idx, static_cast<unsigned long long>(r));
            return {std::string(buf)};
        }
        default:
            return {"10." + std::to_string(template_idx) + "." + std::to_string(r % 256) + "." +
                    std::to_string(r % 250 + 1)};
    }
}

inline std::string instantiate(size_t template_idx, const logtemplar::Config& cfg,
                               std::mt19937_64& rng) {
    const auto tmpl = logtemplar::Template::parse(kParseTemplates[template_idx], cfg);
    const bool allow_two = std::find(kTwoTokenParamTemplates.begin(), kTwoTokenParamTemplates.end(),
                                     template_idx) != kTwoTokenParamTemplates.end();
    std::string content;
    size_t wildcard_idx = 0;
    for (const auto& token : tmpl.tokens()) {
        if (token.is_wildcard()) {
            const bool two = allow_two && (rng() % 2 == 0);
            for (const auto& word : make_param(template_idx, wildcard_idx, two, rng)) {
                if (!content.empty()) content.push_back(' ');
                content += word;
            }
            ++wildcard_idx;
        } else {
            if (!content.empty()) content.push_back(' ');
            content += token.text;
        }
    }
    return content;
}

/**
 * `n_messages` messages drawn from the 20 known templates with imbalanced
 * frequencies. The first two passes visit every template twice so each one
 * has siblings; the remainder is a seeded weighted draw.
 */
inline SyntheticCorpus make_parse_corpus(size_t n_messages, uint64_t seed,
                                         const logtemplar::Config& cfg) {
    std::mt19937_64 rng(seed);
    SyntheticCorpus corpus;
    for (const auto& text : kParseTemplates)
        corpus.templates.push_back(logtemplar::Template::parse(text, cfg).raw());

    const size_t n_templates = kParseTemplates.size();
    std::vector<size_t> order;
    order.reserve(n_messages);
    for (size_t pass = 0; pass < 2 && order.size() < n_messages; ++pass)
        for (size_t t = 0; t < n_templates && order.size() < n_messages; ++t) order.push_back(t);

    // Imbalanced frequencies: weight 1/(t+1).
    std::vector<double> cumulative(n_templates);
    double total = 0;
    for (size_t t = 0; t < n_templates; ++t) {
        total += 1.0 / static_cast<double>(t + 1);
        cumulative[t] = total;
    }
    while (order.size() < n_messages) {
        const double draw = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        size_t t = 0;
        while (t + 1 < n_templates && cumulative[t] <= draw) ++t;
        order.push_back(t);
    }
    // Interleave templates.
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    corpus.records.reserve(n_messages);
    for (size_t i = 0; i < n_messages; ++i) {
        logtemplar::LogRecord record;
        record.line_id = i;
        record.content = instantiate(order[i], cfg, rng);
        record.ground_truth = corpus.templates[order[i]];
        corpus.records.push_back(std::move(record));
    }
    return corpus;
}

/**
 * Sampling corpus with exactly 8 coarse clusters (distinct token triples)
 * times 5 fine clusters (distinct special formats) = 40 fine clusters.
 */
inline SyntheticCorpus make_sampling_corpus(size_t n_messages) {
    SyntheticCorpus corpus;
    corpus.records.reserve(n_messages);
    const char format_chars[5] = {'.', '/', '-', '_', '+'};
    for (size_t i = 0; i < n_messages; ++i) {
        const size_t group = i % 8;
        const size_t format = i % 5;
        const size_t value = i / 40;
        std::string content = "alpha" + std::to_string(group) + " beta" + std::to_string(group) +
                              " gamma" + std::to_string(group) + " p" + std::to_string(value) +
                              format_chars[format] + "q" + std::to_string(value);
        corpus.records.push_back(logtemplar::LogRecord{i, std::move(content), std::nullopt});
    }
    return corpus;
}

}  // namespace corpus
