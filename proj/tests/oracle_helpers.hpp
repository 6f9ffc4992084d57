// Test-only reference implementations, independent of the library code they
// check: an exhaustive wildcard matcher, a memoized top-down LCS, and
// brute-force metric computations.
#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "logtemplar/cache.hpp"
#include "logtemplar/core.hpp"
#include "logtemplar/metrics.hpp"

namespace oracle {

// Enumerates every wildcard span assignment (1..max_span tokens per
// wildcard) and reports whether any consumes the whole input.
inline bool brute_matches(const std::vector<logtemplar::Token>& pattern,
                          const std::vector<std::string>& input, int max_span, size_t pi = 0,
                          size_t ti = 0) {
    if (pi == pattern.size()) return ti == input.size();
    if (ti == input.size()) return false;
    if (!pattern[pi].is_wildcard())
        return pattern[pi].text == input[ti] && brute_matches(pattern, input, max_span, pi + 1, ti + 1);
    for (int span = 1; span <= max_span && ti + static_cast<size_t>(span) <= input.size(); ++span)
        if (brute_matches(pattern, input, max_span, pi + 1, ti + static_cast<size_t>(span))) return true;
    return false;
}

// The reference matcher over a whole template store: all full matches, then
// the same winner rule (most constant tokens, then smallest id).
inline std::optional<int> brute_best_match(const std::vector<std::pair<int, logtemplar::Template>>& store,
                                           const std::vector<std::string>& input, int max_span) {
    std::optional<int> best;
    size_t best_constants = 0;
    for (const auto& [id, tmpl] : store) {
        if (!brute_matches(tmpl.tokens(), input, max_span)) continue;
        const size_t constants = tmpl.constant_count();
        if (!best || constants > best_constants || (constants == best_constants && id < *best)) {
            best = id;
            best_constants = constants;
        }
    }
    return best;
}

// Top-down memoized LCS length over token lists.
inline int lcs_memo(const std::vector<logtemplar::Token>& a, const std::vector<logtemplar::Token>& b,
                    size_t i, size_t j, std::map<std::pair<size_t, size_t>, int>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    int value;
    if (a[i] == b[j]) value = 1 + lcs_memo(a, b, i + 1, j + 1, memo);
    else value = std::max(lcs_memo(a, b, i + 1, j, memo), lcs_memo(a, b, i, j + 1, memo));
    memo[key] = value;
    return value;
}

inline double similarity_reference(const logtemplar::Template& a, const logtemplar::Template& b) {
    std::map<std::pair<size_t, size_t>, int> memo;
    const int lcs = lcs_memo(a.tokens(), b.tokens(), 0, 0, memo);
    return 2.0 * lcs / static_cast<double>(a.size() + b.size());
}

// ---------------------------------------------------------------------------
// Metric references: direct per-message scans, quadratic but obviously
// faithful to the definitions.

struct RefCounts {
    double ga = 0, pa = 0;
    size_t n_g = 0, n_p = 0, n_c = 0, n_correct_template = 0;
};

inline RefCounts metrics_reference(const std::vector<logtemplar::ParsedMessage>& parsed,
                                   const logtemplar::GroundTruth& truth, const logtemplar::Config& cfg) {
    using logtemplar::canonical_template;
    RefCounts ref;
    if (parsed.empty()) {
        ref.ga = ref.pa = 1.0;
        return ref;
    }

    std::map<size_t, std::string> truth_of;
    for (const auto& [line, text] : truth) truth_of[line] = canonical_template(text, cfg);
    std::map<size_t, int> tid_of;
    std::map<size_t, std::string> text_of;
    for (const auto& p : parsed) {
        tid_of[p.line_id] = p.template_id;
        text_of[p.line_id] = canonical_template(p.template_text, cfg);
    }

    size_t grouped = 0, parsed_ok = 0;
    for (const auto& p : parsed) {
        std::set<size_t> parsed_group, truth_group;
        for (const auto& q : parsed)
            if (q.template_id == p.template_id) parsed_group.insert(q.line_id);
        for (const auto& [line, text] : truth_of)
            if (text == truth_of.at(p.line_id)) truth_group.insert(line);
        if (parsed_group == truth_group) ++grouped;
        if (text_of.at(p.line_id) == truth_of.at(p.line_id)) ++parsed_ok;
    }
    ref.ga = static_cast<double>(grouped) / static_cast<double>(parsed.size());
    ref.pa = static_cast<double>(parsed_ok) / static_cast<double>(parsed.size());

    std::set<std::string> truth_templates;
    for (const auto& [line, text] : truth_of) truth_templates.insert(text);
    ref.n_g = truth_templates.size();

    std::set<int> tids;
    for (const auto& p : parsed) tids.insert(p.template_id);
    ref.n_p = tids.size();

    for (int tid : tids) {
        std::set<size_t> members;
        for (const auto& p : parsed)
            if (p.template_id == tid) members.insert(p.line_id);
        const std::string& truth_text = truth_of.at(*members.begin());
        std::set<size_t> truth_members;
        for (const auto& [line, text] : truth_of)
            if (text == truth_text) truth_members.insert(line);
        if (members != truth_members) continue;
        ++ref.n_c;
        if (text_of.at(*members.begin()) == truth_text) ++ref.n_correct_template;
    }
    return ref;
}

}  // namespace oracle
