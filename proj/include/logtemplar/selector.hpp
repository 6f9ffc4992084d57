#pragma once

#include <algorithm>
#include <string_view>
#include <vector>

#include "logtemplar/core.hpp"
#include "logtemplar/sampler.hpp"

namespace logtemplar {

/// |a ∩ b| / |a ∪ b|; two empty sets count as identical (1.0).
inline double jaccard(const FeatureSet& a, const FeatureSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t intersection = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else ++intersection, ++ia, ++ib;
    }
    return static_cast<double>(intersection) / static_cast<double>(a.size() + b.size() - intersection);
}

struct Demonstration {
    std::string message;
    Template tmpl;
    double similarity = 0.0;
};

/**
 * kNN demonstration selection: the k labeled candidates with the highest
 * Jaccard similarity between feature sets (ties toward the smaller
 * line_id), returned in ASCENDING similarity order so the most similar
 * example sits closest to the queried log in the prompt.
 *
 * A query with an empty feature set (all-whitespace content) cannot be
 * ranked; it falls back to representatives of the k largest fine clusters,
 * all at similarity 0.
 */
inline std::vector<Demonstration> select_demos(std::string_view query, const CandidateSet& pool,
                                               int k, const Config& cfg) {
    struct Scored {
        const Candidate* candidate;
        double similarity;
    };
    const FeatureSet query_features = feature_set(query, cfg);

    std::vector<Scored> scored;
    scored.reserve(pool.entries.size());
    for (const auto& candidate : pool.entries) {
        if (!candidate.label) continue;  // unlabeled entries cannot demonstrate
        const double sim = query_features.empty()
                               ? 0.0
                               : jaccard(query_features, feature_set(candidate.record.content, cfg));
        scored.push_back(Scored{&candidate, sim});
    }

    if (query_features.empty()) {
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.candidate->fine_cluster_size != b.candidate->fine_cluster_size)
                return a.candidate->fine_cluster_size > b.candidate->fine_cluster_size;
            return a.candidate->record.line_id < b.candidate->record.line_id;
        });
    } else {
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            return a.candidate->record.line_id < b.candidate->record.line_id;
        });
    }
    if (scored.size() > static_cast<size_t>(std::max(k, 0)))
        scored.resize(static_cast<size_t>(std::max(k, 0)));

    // Reverse of selection order = ascending similarity, most similar last.
    std::vector<Demonstration> demos;
    demos.reserve(scored.size());
    for (auto it = scored.rbegin(); it != scored.rend(); ++it)
        demos.push_back(Demonstration{it->candidate->record.content, *it->candidate->label, it->similarity});
    return demos;
}

}  // namespace logtemplar
