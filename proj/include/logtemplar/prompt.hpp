#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logtemplar/core.hpp"
#include "logtemplar/selector.hpp"

namespace logtemplar {

// Four sentences: the task, what a template is, the input format, the
// output format (backtick convention extract_template relies on).
inline constexpr std::string_view kDefaultInstruction =
    "You are given log messages and must produce their log templates. "
    "A log template keeps the constant text of a message and replaces every "
    "dynamic parameter with the wildcard <*>. "
    "Each example below is a log message followed by its template wrapped in "
    "backticks. "
    "Answer with a single line starting with the words Log template: and "
    "containing only the final message's template in backticks.";

// The default prompt layout. Named slots: {instruction}, {demonstrations},
// {query}. A custom layout file may rearrange them freely.
inline constexpr std::string_view kDefaultLayout =
    "{instruction}\n"
    "\n"
    "{demonstrations}"
    "Log message: {query}\n"
    "Log template: ";

/// The three-part in-context-learning prompt: instruction, demonstrations
/// in ascending similarity (most similar adjacent to the query), query.
struct Prompt {
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> demos;  // (message, template rendering)
    std::string query;
    std::string layout;  // slot template used by render()

    std::string render() const {
        std::string demo_block;
        for (const auto& [message, tmpl] : demos) {
            demo_block += "Log message: ";
            demo_block += message;
            demo_block += "\nLog template: `";
            demo_block += tmpl;
            demo_block += "`\n\n";
        }
        std::string text = layout.empty() ? std::string(kDefaultLayout) : layout;
        const auto substitute = [&text](std::string_view slot, std::string_view value) {
            for (size_t pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos))
                text.replace(pos, slot.size(), value), pos += value.size();
        };
        substitute("{instruction}", instruction);
        substitute("{demonstrations}", demo_block);
        substitute("{query}", query);
        return text;
    }
};

inline Prompt build_prompt(std::string_view query, const std::vector<Demonstration>& demos,
                           const Config& cfg) {
    Prompt prompt;
    prompt.instruction = cfg.instruction.empty() ? std::string(kDefaultInstruction) : cfg.instruction;
    prompt.layout = cfg.prompt_layout;
    for (const auto& demo : demos) prompt.demos.emplace_back(demo.message, demo.tmpl.raw());
    prompt.query = query;
    return prompt;
}

namespace detail {

// Documented placeholder normalization: brace-wrapped spans, the literal
// <VAR>, and [*] all become <*>. Unknown bracketed spellings stay constants.
inline std::string normalize_placeholders(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        if (text[i] == '{') {
            const size_t close = text.find('}', i + 1);
            const size_t next_open = text.find('{', i + 1);
            if (close != std::string_view::npos && (next_open == std::string_view::npos || close < next_open)) {
                out += kWildcard;
                i = close + 1;
                continue;
            }
        }
        if (text.compare(i, 5, "<VAR>") == 0) {
            out += kWildcard;
            i += 5;
            continue;
        }
        if (text.compare(i, 3, "[*]") == 0) {
            out += kWildcard;
            i += 3;
            continue;
        }
        out += text[i++];
    }
    return out;
}

inline std::optional<std::string_view> backtick_span(std::string_view line) {
    const size_t open = line.find('`');
    if (open == std::string_view::npos) return std::nullopt;
    const size_t close = line.find('`', open + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return line.substr(open + 1, close - open - 1);
}

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && is_whitespace(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_whitespace(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/**
 * @brief Parses a model reply back into a Template.
 *
 * Looks for the first `Log template:` line and takes its backtick-wrapped
 * span; when no such line exists, falls back to the last non-empty line
 * (backticks stripped if present). Placeholder spellings are normalized to
 * <*> before tokenization. Returns nullopt when nothing remains — the
 * malformed-reply signal the pipeline turns into a fallback.
 */
inline std::optional<Template> extract_template(std::string_view reply, const Config& cfg) {
    std::string span;
    bool found = false;

    size_t pos = 0;
    std::string_view last_nonempty;
    while (pos <= reply.size()) {
        size_t end = reply.find('\n', pos);
        if (end == std::string_view::npos) end = reply.size();
        const std::string_view line = detail::strip(reply.substr(pos, end - pos));
        if (!line.empty()) last_nonempty = line;
        if (!found && line.starts_with("Log template:")) {
            if (auto wrapped = detail::backtick_span(line)) {
                span = std::string(*wrapped);
                found = true;
            } else {
                span = std::string(detail::strip(line.substr(13)));
                found = true;
            }
        }
        if (end == reply.size()) break;
        pos = end + 1;
    }
    if (!found) {
        if (auto wrapped = detail::backtick_span(last_nonempty)) span = std::string(*wrapped);
        else span = std::string(last_nonempty);
    }

    const std::string normalized = detail::normalize_placeholders(span);
    if (tokenize(normalized, cfg.delimiters).empty()) return std::nullopt;
    return Template::parse(normalized, cfg.delimiters);
}

}  // namespace logtemplar
