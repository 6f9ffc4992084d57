#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logtemplar/core.hpp"
#include "logtemplar/stopwords.hpp"

namespace logtemplar {

/// Log messages sharing the same top-K frequent-token signature.
struct FineCluster {
    SpecialFormat format;
    std::vector<size_t> members;  // line_ids
};

struct CoarseCluster {
    std::vector<std::string> key;  // sorted top-K token signature
    std::vector<size_t> members;   // line_ids, union of the fine clusters
    std::vector<FineCluster> fine;
};

/// A sampled candidate: the record, its (optional) ground-truth label and
/// the fine cluster it came from.
struct Candidate {
    LogRecord record;
    std::optional<Template> label;
    size_t fine_cluster_id = 0;
    size_t fine_cluster_size = 0;
};

/// The labeled demonstration pool produced by hierarchical sampling.
struct CandidateSet {
    std::vector<Candidate> entries;

    bool fully_labeled() const {
        return std::all_of(entries.begin(), entries.end(),
                           [](const Candidate& c) { return c.label.has_value(); });
    }
};

/// Counts token occurrences across all records, excluding stop words
/// (case-insensitive membership in the bundled list).
inline std::unordered_map<std::string, size_t> token_frequencies(std::span<const LogRecord> records,
                                                                 const Config& cfg) {
    std::unordered_map<std::string, size_t> freqs;
    for (const auto& record : records)
        for (auto& token : tokenize(record.content, cfg.delimiters))
            if (!is_stop_word(token)) ++freqs[std::move(token)];
    return freqs;
}

/**
 * A record's top-K frequent tokens: distinct non-stop-word tokens ranked by
 * (global frequency desc, token text asc), truncated to K, then sorted
 * lexicographically for use as a cluster key.
 */
inline std::vector<std::string> signature(const LogRecord& record,
                                          const std::unordered_map<std::string, size_t>& freqs,
                                          int top_k, const Config& cfg) {
    std::vector<std::string> distinct;
    for (auto& token : tokenize(record.content, cfg.delimiters)) {
        if (is_stop_word(token)) continue;
        if (std::find(distinct.begin(), distinct.end(), token) == distinct.end())
            distinct.push_back(std::move(token));
    }
    auto freq_of = [&](const std::string& t) {
        const auto it = freqs.find(t);
        return it == freqs.end() ? size_t{0} : it->second;
    };
    std::sort(distinct.begin(), distinct.end(), [&](const std::string& a, const std::string& b) {
        const size_t fa = freq_of(a), fb = freq_of(b);
        return fa != fb ? fa > fb : a < b;
    });
    if (distinct.size() > static_cast<size_t>(top_k)) distinct.resize(static_cast<size_t>(top_k));
    std::sort(distinct.begin(), distinct.end());
    return distinct;
}

/// Partitions records by signature into coarse clusters, then by special
/// format into fine clusters. Every record lands in exactly one fine cluster.
inline std::vector<CoarseCluster> cluster(std::span<const LogRecord> records, const Config& cfg) {
    const auto freqs = token_frequencies(records, cfg);

    std::map<std::vector<std::string>, std::map<SpecialFormat, std::vector<size_t>>> buckets;
    for (const auto& record : records) {
        auto key = signature(record, freqs, cfg.top_k_tokens, cfg);
        buckets[std::move(key)][special_format(record.content)].push_back(record.line_id);
    }

    std::vector<CoarseCluster> clusters;
    clusters.reserve(buckets.size());
    for (auto& [key, formats] : buckets) {
        CoarseCluster coarse;
        coarse.key = key;
        for (auto& [format, members] : formats) {
            coarse.members.insert(coarse.members.end(), members.begin(), members.end());
            coarse.fine.push_back(FineCluster{format, std::move(members)});
        }
        std::sort(coarse.members.begin(), coarse.members.end());
        clusters.push_back(std::move(coarse));
    }
    return clusters;
}

/**
 * The hierarchical quota: with clusters pre-sorted descending by size,
 * cluster i (1-based) receives floor(total/n)+1 when i <= total mod n and
 * floor(total/n) otherwise. The quotas always sum to `total`.
 */
inline std::vector<int> distribute_quota(int total, const std::vector<size_t>& sorted_sizes_desc) {
    const size_t n = sorted_sizes_desc.size();
    if (n == 0) {
        if (total != 0) throw std::invalid_argument("distribute_quota: no clusters for a nonzero quota");
        return {};
    }
    const int base = total / static_cast<int>(n);
    const int remainder = total % static_cast<int>(n);
    std::vector<int> quotas(n, base);
    for (int i = 0; i < remainder; ++i) quotas[static_cast<size_t>(i)] += 1;
    return quotas;
}

namespace detail {

// Caps quotas at capacity and hands surplus to the next cluster in priority
// order (wrapping until placed). Total is preserved whenever the combined
// capacity allows.
inline std::vector<int> cascade(std::vector<int> quotas, const std::vector<size_t>& capacities) {
    int surplus = 0;
    for (size_t i = 0; i < quotas.size(); ++i) {
        const int cap = static_cast<int>(capacities[i]);
        if (quotas[i] > cap) {
            surplus += quotas[i] - cap;
            quotas[i] = cap;
        }
    }
    while (surplus > 0) {
        bool placed = false;
        for (size_t i = 0; i < quotas.size() && surplus > 0; ++i) {
            const int spare = static_cast<int>(capacities[i]) - quotas[i];
            if (spare > 0) {
                const int take = std::min(spare, surplus);
                quotas[i] += take;
                surplus -= take;
                placed = true;
            }
        }
        if (!placed) break;  // every cluster is full
    }
    return quotas;
}

inline uint64_t derive_seed(uint64_t root_seed, std::string_view subsystem) {
    // FNV-1a over the subsystem tag, mixed with the root seed.
    uint64_t h = 14695981039346656037ull ^ root_seed;
    for (char c : subsystem) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// Deterministic draw of `count` members without replacement (partial
// Fisher-Yates, modulo reduction keeps behavior identical across stdlibs).
inline std::vector<size_t> draw_without_replacement(std::vector<size_t> members, size_t count,
                                                    std::mt19937_64& rng) {
    count = std::min(count, members.size());
    for (size_t i = 0; i < count; ++i) {
        const size_t j = i + static_cast<size_t>(rng() % (members.size() - i));
        std::swap(members[i], members[j]);
    }
    members.resize(count);
    std::sort(members.begin(), members.end());
    return members;
}

}  // namespace detail

/// The first `fraction` of the dataset, the slice candidates are drawn from.
inline std::span<const LogRecord> sampling_slice(std::span<const LogRecord> records, double fraction) {
    if (records.empty()) return records;
    auto n = static_cast<size_t>(fraction * static_cast<double>(records.size()) + 0.5);
    n = std::clamp<size_t>(n, 1, records.size());
    return records.first(n);
}

/**
 * @brief Hierarchical candidate sampling.
 *
 * Clusters the given records coarse-to-fine, sorts clusters at both levels
 * by (size desc, smallest member line_id), then distributes the candidate
 * quota with the same hierarchical rule at each level. Quota that exceeds a
 * cluster's size cascades to the next cluster in sorted order so exactly
 * min(K_s, |records|) candidates come back. Within a fine cluster members
 * are drawn without replacement from a generator seeded by cfg.rng_seed.
 */
inline CandidateSet sample_candidates(std::span<const LogRecord> records, const Config& cfg) {
    CandidateSet set;
    if (records.empty() || cfg.candidate_count <= 0) return set;

    std::unordered_map<size_t, const LogRecord*> by_line_id;
    by_line_id.reserve(records.size());
    for (const auto& record : records) by_line_id.emplace(record.line_id, &record);

    auto clusters = cluster(records, cfg);

    auto min_member = [](const std::vector<size_t>& members) {
        return *std::min_element(members.begin(), members.end());
    };
    std::sort(clusters.begin(), clusters.end(), [&](const CoarseCluster& a, const CoarseCluster& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return min_member(a.members) < min_member(b.members);
    });
    for (auto& coarse : clusters)
        std::sort(coarse.fine.begin(), coarse.fine.end(), [&](const FineCluster& a, const FineCluster& b) {
            if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
            return min_member(a.members) < min_member(b.members);
        });

    const int total = std::min<int>(cfg.candidate_count, static_cast<int>(records.size()));

    std::vector<size_t> coarse_sizes(clusters.size());
    for (size_t i = 0; i < clusters.size(); ++i) coarse_sizes[i] = clusters[i].members.size();
    const auto coarse_quotas = detail::cascade(distribute_quota(total, coarse_sizes), coarse_sizes);

    std::mt19937_64 rng(detail::derive_seed(cfg.rng_seed, "sampler"));

    size_t fine_cluster_id = 0;
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        const auto& coarse = clusters[ci];
        std::vector<size_t> fine_sizes(coarse.fine.size());
        for (size_t fi = 0; fi < coarse.fine.size(); ++fi) fine_sizes[fi] = coarse.fine[fi].members.size();
        const auto fine_quotas =
            detail::cascade(distribute_quota(coarse_quotas[ci], fine_sizes), fine_sizes);

        for (size_t fi = 0; fi < coarse.fine.size(); ++fi, ++fine_cluster_id) {
            const auto chosen = detail::draw_without_replacement(
                coarse.fine[fi].members, static_cast<size_t>(fine_quotas[fi]), rng);
            for (size_t line_id : chosen) {
                const LogRecord& record = *by_line_id.at(line_id);
                Candidate candidate;
                candidate.record = record;
                candidate.fine_cluster_id = fine_cluster_id;
                candidate.fine_cluster_size = coarse.fine[fi].members.size();
                if (record.ground_truth && !tokenize(*record.ground_truth, cfg.delimiters).empty())
                    candidate.label = Template::parse(*record.ground_truth, cfg.delimiters);
                set.entries.push_back(std::move(candidate));
            }
        }
    }
    return set;
}

}  // namespace logtemplar
