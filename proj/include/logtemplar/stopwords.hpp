#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>

namespace logtemplar {

// Bundled English stop-word list used when counting token frequencies for
// coarse clustering. Membership is case-insensitive; the array is sorted so
// lookup is a binary search. Single-letter words and contraction fragments
// are deliberately absent: they do not arise under whitespace tokenization
// and single letters are often meaningful log tokens.
inline constexpr std::array<std::string_view, 118> kStopWords = {
    "about",   "above",   "after",   "again",   "against", "all",     "am",      "an",
    "and",     "any",     "are",     "as",      "at",      "be",      "because", "been",
    "before",  "being",   "below",   "between", "both",    "but",     "by",      "can",
    "did",     "do",      "does",    "doing",   "down",    "during",  "each",    "few",
    "for",     "from",    "further", "had",     "has",     "have",    "having",  "he",
    "her",     "here",    "hers",    "him",     "his",     "how",     "if",      "in",
    "into",    "is",      "it",      "its",     "itself",  "just",    "me",      "more",
    "most",    "my",      "myself",  "no",      "nor",     "not",     "now",     "of",
    "off",     "on",      "once",    "only",    "or",      "other",   "our",     "ours",
    "out",     "over",    "own",     "same",    "she",     "should",  "so",      "some",
    "such",    "than",    "that",    "the",     "their",   "theirs",  "them",    "then",
    "there",   "these",   "they",    "this",    "those",   "through", "to",      "too",
    "under",   "until",   "up",      "very",    "was",     "we",      "were",    "what",
    "when",    "where",   "which",   "while",   "who",     "whom",    "why",     "will",
    "with",    "you",     "your",    "yours",   "yourself", "yourselves",
};

static_assert(std::is_sorted(kStopWords.begin(), kStopWords.end()));

inline bool is_stop_word(std::string_view token) {
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::binary_search(kStopWords.begin(), kStopWords.end(), std::string_view(lower));
}

}  // namespace logtemplar
