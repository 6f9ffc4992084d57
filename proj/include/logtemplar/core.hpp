#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "logtemplar/config.hpp"

namespace logtemplar {

inline constexpr std::string_view kWildcard = "<*>";

/// One raw log message: the Content field with ingestion headers already
/// stripped, plus its position and (when labeled) ground-truth template.
struct LogRecord {
    size_t line_id = 0;  // unique within a dataset
    std::string content;
    std::optional<std::string> ground_truth;
};

/// A template token: constant text or the wildcard `<*>`.
struct Token {
    enum class Kind { Constant, Wildcard };

    Kind kind = Kind::Constant;
    std::string text;  // empty for wildcards

    static Token constant(std::string t) { return Token{Kind::Constant, std::move(t)}; }
    static Token wildcard() { return Token{Kind::Wildcard, {}}; }

    bool is_wildcard() const { return kind == Kind::Wildcard; }
    std::string_view render() const { return is_wildcard() ? kWildcard : std::string_view(text); }

    friend bool operator==(const Token& a, const Token& b) {
        return a.kind == b.kind && (a.is_wildcard() || a.text == b.text);
    }
};

inline bool is_whitespace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/**
 * @brief Splits log content into tokens.
 *
 * Whitespace delimiters separate tokens and are dropped; every other
 * delimiter character is emitted as its own single-character token. A ' '
 * in `delimiters` enables the whole whitespace class. Total on any input;
 * never produces empty tokens. All-delimiter input yields an empty list.
 */
inline std::vector<std::string> tokenize(std::string_view content, std::string_view delimiters) {
    const bool whitespace_class = delimiters.find(' ') != std::string_view::npos;
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (char c : content) {
        const bool ws = is_whitespace(c);
        const bool is_delim = ws ? (whitespace_class || delimiters.find(c) != std::string_view::npos)
                                 : delimiters.find(c) != std::string_view::npos;
        if (is_delim) {
            flush();
            if (!ws) tokens.emplace_back(1, c);
        } else {
            current.push_back(c);
        }
    }
    flush();
    return tokens;
}

inline std::vector<std::string> tokenize(std::string_view content, const Config& cfg) {
    return tokenize(content, cfg.delimiters);
}

/**
 * @brief An ordered token list where any token may be the wildcard `<*>`.
 *
 * Invariants enforced on construction: non-empty, no two adjacent wildcards
 * (two variable-length wildcards in a row are indistinguishable from one
 * while matching, so they collapse), and any constant spelled exactly `<*>`
 * is promoted to a wildcard. `raw()` is the canonical rendering: tokens
 * joined by single spaces.
 */
class Template {
public:
    explicit Template(std::vector<Token> tokens) {
        tokens_.reserve(tokens.size());
        for (auto& t : tokens) {
            if (!t.is_wildcard() && t.text == kWildcard) t = Token::wildcard();
            if (t.is_wildcard() && !tokens_.empty() && tokens_.back().is_wildcard()) continue;
            tokens_.push_back(std::move(t));
        }
        if (tokens_.empty()) throw std::invalid_argument("template: empty after normalization");
        for (size_t i = 0; i < tokens_.size(); ++i) {
            if (i) raw_.push_back(' ');
            raw_.append(tokens_[i].render());
        }
    }

    /// Tokenizes `text` per core rules and builds a Template from it.
    static Template parse(std::string_view text, std::string_view delimiters) {
        std::vector<Token> tokens;
        for (auto& word : tokenize(text, delimiters))
            tokens.push_back(word == kWildcard ? Token::wildcard() : Token::constant(std::move(word)));
        return Template(std::move(tokens));
    }

    static Template parse(std::string_view text, const Config& cfg) { return parse(text, cfg.delimiters); }

    const std::vector<Token>& tokens() const { return tokens_; }
    const std::string& raw() const { return raw_; }
    size_t size() const { return tokens_.size(); }

    size_t constant_count() const {
        size_t n = 0;
        for (const auto& t : tokens_) n += !t.is_wildcard();
        return n;
    }

    bool has_wildcard() const { return constant_count() != tokens_.size(); }

    friend bool operator==(const Template& a, const Template& b) { return a.raw_ == b.raw_; }

private:
    std::vector<Token> tokens_;
    std::string raw_;
};

/// Characters of a message that are not alphanumeric and not whitespace.
using SpecialFormat = std::set<char>;

/// Token strings and special characters of a message; the domain of the
/// Jaccard similarity used for demonstration selection.
using FeatureSet = std::set<std::string>;

inline bool is_special_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) == 0 && std::isspace(u) == 0;
}

inline SpecialFormat special_format(std::string_view content) {
    SpecialFormat chars;
    for (char c : content)
        if (is_special_char(c)) chars.insert(c);
    return chars;
}

inline FeatureSet feature_set(std::string_view content, const Config& cfg) {
    FeatureSet items;
    for (auto& token : tokenize(content, cfg.delimiters)) items.insert(std::move(token));
    for (char c : special_format(content)) items.emplace(1, c);
    return items;
}

/// Renders a SpecialFormat for cluster keys and debug output, e.g. ":_./".
inline std::string format_key(const SpecialFormat& format) {
    return std::string(format.begin(), format.end());
}

}  // namespace logtemplar
