#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "logtemplar/core.hpp"
#include "logtemplar/metrics.hpp"
#include "logtemplar/sampler.hpp"

namespace logtemplar {
namespace csv {

/**
 * Reads one CSV record (RFC 4180 quoting: embedded commas, doubled quotes
 * and embedded newlines inside quoted fields). `lineno` advances past every
 * physical line the record spans. Returns false on clean end of input.
 */
inline bool read_record(std::istream& in, std::vector<std::string>& fields, size_t& lineno) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    ++lineno;

    std::string field;
    bool quoted = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++lineno;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace csv

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

inline size_t column_index(const std::vector<std::string>& header, std::string_view name,
                           const std::string& path) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::runtime_error(path + ": missing required column '" + std::string(name) + "'");
}

inline std::optional<size_t> optional_column(const std::vector<std::string>& header, std::string_view name) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

inline size_t parse_line_id(const std::string& text, const std::string& path, size_t lineno) {
    try {
        const long long value = std::stoll(text);
        if (value < 0) throw std::out_of_range("negative");
        return static_cast<size_t>(value);
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad LineId '" + text + "'");
    }
}

}  // namespace detail

/**
 * Loads a dataset CSV with columns LineId, Content and optional
 * EventTemplate. Rows with a missing field, an unparseable LineId, a
 * duplicate LineId or whitespace-only Content are rejected with a
 * line-numbered error.
 */
inline std::vector<LogRecord> load_dataset(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<std::string> fields;
    size_t lineno = 0;
    if (!csv::read_record(in, fields, lineno)) throw std::runtime_error(path + ": empty file");

    const size_t id_col = detail::column_index(fields, "LineId", path);
    const size_t content_col = detail::column_index(fields, "Content", path);
    const auto truth_col = detail::optional_column(fields, "EventTemplate");

    std::vector<LogRecord> records;
    std::set<size_t> seen;
    while (csv::read_record(in, fields, lineno)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        const size_t needed = std::max({id_col, content_col, truth_col.value_or(0)});
        if (fields.size() <= needed)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": too few columns");

        LogRecord record;
        record.line_id = detail::parse_line_id(fields[id_col], path, lineno);
        if (!seen.insert(record.line_id).second)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate LineId " +
                                     std::to_string(record.line_id));
        record.content = fields[content_col];
        if (logtemplar::detail::trim_copy(record.content).empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty Content");
        if (truth_col && !fields[*truth_col].empty()) record.ground_truth = fields[*truth_col];
        records.push_back(std::move(record));
    }
    return records;
}

/// Candidates file: LineId, Content, Label. Label is blank when the dataset
/// carried no ground truth (left for manual labeling before parsing).
inline void write_candidates(const std::string& path, const CandidateSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "LineId,Content,Label\n";
    for (const auto& candidate : set.entries)
        out << candidate.record.line_id << ',' << csv::escape(candidate.record.content) << ','
            << csv::escape(candidate.label ? candidate.label->raw() : std::string()) << '\n';
}

inline CandidateSet load_candidates(const std::string& path, const Config& cfg) {
    auto in = detail::open_input(path);
    std::vector<std::string> fields;
    size_t lineno = 0;
    if (!csv::read_record(in, fields, lineno)) throw std::runtime_error(path + ": empty file");

    const size_t id_col = detail::column_index(fields, "LineId", path);
    const size_t content_col = detail::column_index(fields, "Content", path);
    const size_t label_col = detail::column_index(fields, "Label", path);

    CandidateSet set;
    while (csv::read_record(in, fields, lineno)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() <= std::max({id_col, content_col, label_col}))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": too few columns");
        Candidate candidate;
        candidate.record.line_id = detail::parse_line_id(fields[id_col], path, lineno);
        candidate.record.content = fields[content_col];
        const std::string& label = fields[label_col];
        if (!label.empty() && !tokenize(label, cfg.delimiters).empty()) {
            candidate.record.ground_truth = label;
            candidate.label = Template::parse(label, cfg.delimiters);
        }
        set.entries.push_back(std::move(candidate));
    }
    return set;
}

/// Parse output: LineId, TemplateId, Template (canonical rendering).
inline void write_assignments(const std::string& path, const std::vector<ParsedMessage>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "LineId,TemplateId,Template\n";
    for (const auto& row : rows)
        out << row.line_id << ',' << row.template_id << ',' << csv::escape(row.template_text) << '\n';
}

/// Reads a parse-output CSV. TemplateId is optional: without it messages
/// are grouped by identical template text.
inline std::vector<ParsedMessage> load_assignments(const std::string& path, const Config& cfg) {
    auto in = detail::open_input(path);
    std::vector<std::string> fields;
    size_t lineno = 0;
    if (!csv::read_record(in, fields, lineno)) throw std::runtime_error(path + ": empty file");

    const size_t id_col = detail::column_index(fields, "LineId", path);
    auto template_col = detail::optional_column(fields, "Template");
    if (!template_col) template_col = detail::optional_column(fields, "EventTemplate");
    if (!template_col) throw std::runtime_error(path + ": missing Template or EventTemplate column");
    const auto tid_col = detail::optional_column(fields, "TemplateId");

    std::vector<ParsedMessage> rows;
    std::map<std::string, int> ids_by_text;
    while (csv::read_record(in, fields, lineno)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() <= std::max(id_col, std::max(*template_col, tid_col.value_or(0))))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": too few columns");
        ParsedMessage row;
        row.line_id = detail::parse_line_id(fields[id_col], path, lineno);
        row.template_text = fields[*template_col];
        if (tid_col) {
            try {
                row.template_id = std::stoi(fields[*tid_col]);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad TemplateId");
            }
        } else {
            const auto canonical = canonical_template(row.template_text, cfg);
            row.template_id =
                ids_by_text.emplace(canonical, static_cast<int>(ids_by_text.size()) + 1).first->second;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Ground truth for evaluation: a dataset CSV (EventTemplate column) or any
/// CSV with LineId and a Template column.
inline GroundTruth load_ground_truth(const std::string& path) {
    auto in = detail::open_input(path);
    std::vector<std::string> fields;
    size_t lineno = 0;
    if (!csv::read_record(in, fields, lineno)) throw std::runtime_error(path + ": empty file");

    const size_t id_col = detail::column_index(fields, "LineId", path);
    auto truth_col = detail::optional_column(fields, "EventTemplate");
    if (!truth_col) truth_col = detail::optional_column(fields, "Template");
    if (!truth_col) throw std::runtime_error(path + ": missing EventTemplate or Template column");

    GroundTruth truth;
    while (csv::read_record(in, fields, lineno)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() <= std::max(id_col, *truth_col))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": too few columns");
        truth.emplace_back(detail::parse_line_id(fields[id_col], path, lineno), fields[*truth_col]);
    }
    return truth;
}

}  // namespace logtemplar
