#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logtemplar/core.hpp"

namespace logtemplar {

/**
 * Sim(T1, T2) = 2 * |LCS(L1, L2)| / (|L1| + |L2|) over token lists, where a
 * wildcard is equal only to another wildcard.
 */
inline double template_similarity(const Template& a, const Template& b) {
    const auto& x = a.tokens();
    const auto& y = b.tokens();
    // Iterative LCS table; inputs are short (template token counts).
    std::vector<std::vector<int>> lcs(x.size() + 1, std::vector<int>(y.size() + 1, 0));
    for (size_t i = x.size(); i-- > 0;)
        for (size_t j = y.size(); j-- > 0;)
            lcs[i][j] = (x[i] == y[j]) ? lcs[i + 1][j + 1] + 1
                                       : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    return 2.0 * lcs[0][0] / static_cast<double>(x.size() + y.size());
}

/**
 * Merges two similar templates: tokens on one longest common subsequence are
 * kept, every differing run between consecutive anchors (or at either end)
 * becomes a single wildcard. When several LCS alignments exist, the forward
 * walk below resolves ties by advancing in `a` first, which pins down one
 * deterministic result.
 */
inline Template merge_templates(const Template& a, const Template& b) {
    const auto& x = a.tokens();
    const auto& y = b.tokens();
    std::vector<std::vector<int>> lcs(x.size() + 1, std::vector<int>(y.size() + 1, 0));
    for (size_t i = x.size(); i-- > 0;)
        for (size_t j = y.size(); j-- > 0;)
            lcs[i][j] = (x[i] == y[j]) ? lcs[i + 1][j + 1] + 1
                                       : std::max(lcs[i + 1][j], lcs[i][j + 1]);

    std::vector<Token> merged;
    bool gap_open = false;
    size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] == y[j]) {
            if (gap_open) merged.push_back(Token::wildcard());
            gap_open = false;
            merged.push_back(x[i]);
            ++i, ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            gap_open = true;
            ++i;
        } else {
            gap_open = true;
            ++j;
        }
    }
    if (gap_open || i < x.size() || j < y.size()) merged.push_back(Token::wildcard());
    return Template(std::move(merged));  // the constructor collapses adjacent wildcards
}

/**
 * Aligns a template against a tokenized message: returns the consecutive
 * message tokens absorbed by each wildcard (1..max_span per wildcard, in
 * template order), or nullopt when the template cannot produce the message.
 * Greedy-shortest spans first, so the result is deterministic.
 */
inline std::optional<std::vector<std::vector<std::string>>> align_template(
    const Template& t, std::span<const std::string> tokens, int max_span) {
    const auto& pattern = t.tokens();
    std::vector<std::vector<std::string>> spans;

    const auto rec = [&](auto&& self, size_t pi, size_t ti) -> bool {
        if (pi == pattern.size()) return ti == tokens.size();
        if (ti == tokens.size()) return false;
        if (!pattern[pi].is_wildcard())
            return pattern[pi].text == tokens[ti] && self(self, pi + 1, ti + 1);
        const size_t longest = std::min<size_t>(static_cast<size_t>(max_span), tokens.size() - ti);
        for (size_t span = 1; span <= longest; ++span) {
            if (self(self, pi + 1, ti + span)) {
                spans.insert(spans.begin(),
                             std::vector<std::string>(tokens.begin() + static_cast<long>(ti),
                                                      tokens.begin() + static_cast<long>(ti + span)));
                return true;
            }
        }
        return false;
    };
    if (!rec(rec, 0, 0)) return std::nullopt;
    return spans;
}

struct MatchHit {
    int template_id;
    Template tmpl;
};

/// Result of a cache lookup: an exact Hit, or a Miss carrying the relevant
/// templates found in the subtrees of every stop node (deduplicated, in
/// template_id order).
struct MatchOutcome {
    std::optional<MatchHit> hit;
    std::vector<std::pair<int, Template>> relevant;

    bool is_hit() const { return hit.has_value(); }
};

struct UpdateResult {
    enum class Action { Inserted, Refined };
    Action action;
    int template_id;
    Template tmpl;
    // Set when a refined path collided with an existing leaf and the two
    // unified: the id that disappeared (the larger of the pair).
    std::optional<int> unified_from;
};

/**
 * @brief The adaptive parsing cache: a wildcard prefix tree of templates.
 *
 * Each edge is labeled with a token; each leaf marker stores one template
 * equal to the token concatenation along its root path. A constant edge
 * consumes exactly one equal input token, a wildcard edge consumes between
 * 1 and wildcard_max_span consecutive tokens. A node has at most one
 * wildcard child and never two constant children with the same label (both
 * guaranteed by keying children on the rendered token).
 *
 * Concurrency contract: match() is read-only and may run concurrently
 * against a frozen tree; update()/insert() require exclusive access.
 */
class CacheTree {
public:
    CacheTree() : root_(std::make_unique<Node>()) {}

    CacheTree(CacheTree&&) noexcept = default;
    CacheTree& operator=(CacheTree&&) noexcept = default;

    /**
     * Matches a tokenized message against the tree. Hit iff some leaf path
     * consumes the full token list; among several matching leaves the one
     * with the most constant tokens wins, ties broken by smaller id. On a
     * miss, collects the subtree templates of every stop node (the deepest
     * node where progress stopped on each explored branch).
     */
    MatchOutcome match(std::span<const std::string> tokens, const Config& cfg) const {
        MatchOutcome out;
        if (tokens.empty()) return out;

        std::vector<const std::pair<int, Template>*> hits;
        std::set<const Node*> stops;
        std::set<std::pair<const Node*, size_t>> visited;
        search(root_.get(), 0, tokens, static_cast<size_t>(cfg.wildcard_max_span), visited, hits, stops);

        if (!hits.empty()) {
            const auto* best = hits.front();
            for (const auto* h : hits) {
                const auto hc = h->second.constant_count(), bc = best->second.constant_count();
                if (hc > bc || (hc == bc && h->first < best->first)) best = h;
            }
            out.hit = MatchHit{best->first, best->second};
            return out;
        }

        std::set<int> seen;
        for (const Node* stop : stops) collect(stop, seen, out.relevant);
        std::sort(out.relevant.begin(), out.relevant.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    /**
     * The adaptive update. Picks the relevant template T_b most similar to
     * `generated` (ties toward the smaller id). Below the merge threshold —
     * or when `relevant` is empty, or when adaptive updates are switched
     * off — `generated` is inserted as a new leaf. Otherwise T_b's leaf is
     * replaced by merge(generated, T_b) keeping T_b's template_id; if the
     * merged path collides with another leaf the two unify under the
     * smaller id.
     */
    UpdateResult update(const Template& generated,
                        const std::vector<std::pair<int, Template>>& relevant,
                        const Config& cfg) {
        if (cfg.adaptive_updates && !relevant.empty()) {
            const std::pair<int, Template>* best = nullptr;
            double best_sim = -1.0;
            for (const auto& candidate : relevant) {
                const double sim = template_similarity(generated, candidate.second);
                if (sim > best_sim || (sim == best_sim && best && candidate.first < best->first)) {
                    best = &candidate;
                    best_sim = sim;
                }
            }
            if (best && best_sim >= cfg.merge_threshold) {
                Template merged = merge_templates(generated, best->second);
                remove_leaf(best->second);
                const auto placed = insert_with_id(merged, best->first);
                return UpdateResult{UpdateResult::Action::Refined, placed.kept, std::move(merged),
                                    placed.displaced};
            }
        }
        const int id = insert(generated);
        return UpdateResult{UpdateResult::Action::Inserted, id, generated, std::nullopt};
    }

    /// Inserts a template, returning its id. Idempotent: an existing path
    /// keeps its id.
    int insert(const Template& t) {
        Node* node = walk_create(t);
        if (node->leaf) return node->leaf->first;
        node->leaf.emplace(next_template_id_++, t);
        ++leaf_count_;
        return node->leaf->first;
    }

    size_t template_count() const { return leaf_count_; }

    /// All stored templates, sorted by id.
    std::vector<std::pair<int, Template>> templates() const {
        std::vector<std::pair<int, Template>> all;
        std::set<int> seen;
        collect(root_.get(), seen, all);
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return all;
    }

    /// One template per line: `<id>\t<canonical rendering>`. Round-trips
    /// exactly through import_snapshot.
    std::string export_snapshot() const {
        std::string out;
        for (const auto& [id, tmpl] : templates()) {
            out += std::to_string(id);
            out += '\t';
            out += tmpl.raw();
            out += '\n';
        }
        return out;
    }

    static CacheTree import_snapshot(std::string_view text, const Config& cfg) {
        CacheTree tree;
        size_t lineno = 0, pos = 0;
        while (pos < text.size()) {
            ++lineno;
            size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            const std::string_view line = text.substr(pos, end - pos);
            pos = end + 1;
            if (line.empty()) continue;
            const size_t tab = line.find('\t');
            if (tab == std::string_view::npos)
                throw std::runtime_error("cache snapshot line " + std::to_string(lineno) + ": missing tab");
            int id = 0;
            try {
                id = std::stoi(std::string(line.substr(0, tab)));
            } catch (const std::exception&) {
                throw std::runtime_error("cache snapshot line " + std::to_string(lineno) + ": bad template id");
            }
            tree.insert_with_id(Template::parse(line.substr(tab + 1), cfg), id);
        }
        return tree;
    }

    /// Test hook: every leaf's template must equal the token path that
    /// reaches it, and the leaf count must match the bookkeeping.
    bool check_paths() const {
        size_t leaves = 0;
        std::vector<std::string> path;
        if (!check_node(root_.get(), path, leaves)) return false;
        return leaves == leaf_count_;
    }

private:
    struct Node {
        // Keyed by rendered token; "<*>" is the unique wildcard child.
        std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
        std::optional<std::pair<int, Template>> leaf;
    };

    void search(const Node* node, size_t pos, std::span<const std::string> tokens, size_t max_span,
                std::set<std::pair<const Node*, size_t>>& visited,
                std::vector<const std::pair<int, Template>*>& hits, std::set<const Node*>& stops) const {
        if (!visited.emplace(node, pos).second) return;
        if (pos == tokens.size()) {
            if (node->leaf)
                hits.push_back(&*node->leaf);
            else
                stops.insert(node);  // input exhausted above a leaf
            return;
        }
        bool advanced = false;
        if (auto it = node->children.find(tokens[pos]); it != node->children.end() && it->first != kWildcard) {
            search(it->second.get(), pos + 1, tokens, max_span, visited, hits, stops);
            advanced = true;
        }
        if (auto it = node->children.find(kWildcard); it != node->children.end()) {
            const size_t longest = std::min(max_span, tokens.size() - pos);
            for (size_t span = 1; span <= longest; ++span)
                search(it->second.get(), pos + span, tokens, max_span, visited, hits, stops);
            advanced = true;
        }
        if (!advanced) stops.insert(node);
    }

    static void collect(const Node* node, std::set<int>& seen, std::vector<std::pair<int, Template>>& out) {
        if (node->leaf && seen.insert(node->leaf->first).second) out.push_back(*node->leaf);
        for (const auto& [key, child] : node->children) collect(child.get(), seen, out);
    }

    Node* walk_create(const Template& t) {
        Node* node = root_.get();
        for (const auto& token : t.tokens()) {
            auto [it, created] = node->children.try_emplace(std::string(token.render()), nullptr);
            if (created) it->second = std::make_unique<Node>();
            node = it->second.get();
        }
        return node;
    }

    struct Placement {
        int kept;
        std::optional<int> displaced;
    };

    /// Insert preserving a caller-chosen id; on a path collision the leaves
    /// unify keeping the smaller id and reporting the one that disappeared.
    Placement insert_with_id(const Template& t, int id) {
        next_template_id_ = std::max(next_template_id_, id + 1);
        Node* node = walk_create(t);
        if (node->leaf) {
            if (node->leaf->first == id) return Placement{id, std::nullopt};
            const int kept = std::min(node->leaf->first, id);
            const int displaced = std::max(node->leaf->first, id);
            node->leaf->first = kept;
            return Placement{kept, displaced};
        }
        node->leaf.emplace(id, t);
        ++leaf_count_;
        return Placement{id, std::nullopt};
    }

    void remove_leaf(const Template& t) { remove_rec(root_.get(), t.tokens(), 0); }

    // Returns true when `node` became empty and may be pruned by its parent.
    bool remove_rec(Node* node, const std::vector<Token>& tokens, size_t depth) {
        if (depth == tokens.size()) {
            if (node->leaf) {
                node->leaf.reset();
                --leaf_count_;
            }
        } else {
            const auto it = node->children.find(tokens[depth].render());
            if (it != node->children.end() && remove_rec(it->second.get(), tokens, depth + 1))
                node->children.erase(it);
        }
        return !node->leaf && node->children.empty();
    }

    bool check_node(const Node* node, std::vector<std::string>& path, size_t& leaves) const {
        if (node->leaf) {
            ++leaves;
            if (path.empty()) return false;
            std::string rendered;
            for (size_t i = 0; i < path.size(); ++i) {
                if (i) rendered.push_back(' ');
                rendered += path[i];
            }
            // A raw comparison also catches adjacent-wildcard paths, which
            // would render differently from the collapsed template.
            if (rendered != node->leaf->second.raw()) return false;
        }
        for (const auto& [key, child] : node->children) {
            path.push_back(key);
            if (!check_node(child.get(), path, leaves)) return false;
            path.pop_back();
        }
        return true;
    }

    std::unique_ptr<Node> root_;
    int next_template_id_ = 1;
    size_t leaf_count_ = 0;
};

}  // namespace logtemplar
