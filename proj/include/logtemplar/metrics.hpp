#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "logtemplar/core.hpp"

namespace logtemplar {

/// Thrown when the parsed and ground-truth inputs do not cover the same
/// line ids; the CLI maps it to its own exit code.
struct MetricInputMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParsedMessage {
    size_t line_id = 0;
    int template_id = 0;
    std::string template_text;
};

/// Per-line ground truth: line_id plus the EventTemplate text.
using GroundTruth = std::vector<std::pair<size_t, std::string>>;

struct MetricReport {
    double ga = 0, fga = 0, pa = 0, fta = 0;
    double pga = 0, rga = 0, pta = 0, rta = 0;
    size_t n_messages = 0;
    size_t n_gt_templates = 0;      // N_g
    size_t n_parsed_templates = 0;  // N_p
    size_t n_correct_group = 0;     // N_c
    size_t n_correct_template = 0;
};

/// Canonical template rendering used for every text comparison: tokenize
/// with the configured delimiters, join by single spaces, wildcards as <*>
/// (adjacent wildcards collapse). Decouples metric truth from delimiter
/// cosmetics in the input files.
inline std::string canonical_template(std::string_view text, const Config& cfg) {
    if (tokenize(text, cfg.delimiters).empty()) return std::string(text);
    return Template::parse(text, cfg.delimiters).raw();
}

/**
 * Computes GA, FGA (with PGA/RGA), PA and FTA (with PTA/RTA) in one pass.
 *
 * A message is correctly grouped iff its parsed group equals, as a set of
 * line ids, its ground-truth group. A parsed template is correctly grouped
 * iff its message set equals some truth template's message set, and
 * correctly identified iff additionally the canonical template strings
 * match. FGA/FTA are harmonic means, defined as 0 when the precision and
 * recall are both 0.
 */
inline MetricReport evaluate_metrics(const std::vector<ParsedMessage>& parsed, const GroundTruth& truth,
                                     const Config& cfg) {
    MetricReport report;
    report.n_messages = parsed.size();

    std::set<size_t> parsed_ids, truth_ids;
    for (const auto& p : parsed) parsed_ids.insert(p.line_id);
    for (const auto& t : truth) truth_ids.insert(t.first);
    if (parsed_ids.size() != parsed.size() || truth_ids.size() != truth.size())
        throw MetricInputMismatch("duplicate line ids in metric input");
    if (parsed_ids != truth_ids)
        throw MetricInputMismatch("parsed and ground-truth line id sets differ");

    if (parsed.empty()) {
        report.ga = report.pa = 1.0;  // vacuous; the CLI flags empty runs
        return report;
    }

    std::map<size_t, std::string> truth_text;  // line_id -> canonical truth template
    std::map<std::string, std::vector<size_t>> truth_groups;
    for (const auto& [line_id, text] : truth) {
        auto canonical = canonical_template(text, cfg);
        truth_groups[canonical].push_back(line_id);
        truth_text.emplace(line_id, std::move(canonical));
    }

    std::map<size_t, std::string> row_text;  // line_id -> canonical parsed template
    std::map<int, std::vector<size_t>> parsed_groups;
    for (const auto& p : parsed) {
        parsed_groups[p.template_id].push_back(p.line_id);
        row_text.emplace(p.line_id, canonical_template(p.template_text, cfg));
    }

    std::map<std::vector<size_t>, const std::string*> truth_by_members;
    for (auto& [text, members] : truth_groups) {
        std::sort(members.begin(), members.end());
        truth_by_members.emplace(members, &text);
    }

    report.n_gt_templates = truth_groups.size();
    report.n_parsed_templates = parsed_groups.size();

    size_t correctly_grouped_messages = 0;
    for (auto& [template_id, members] : parsed_groups) {
        std::sort(members.begin(), members.end());
        const auto it = truth_by_members.find(members);
        if (it == truth_by_members.end()) continue;
        ++report.n_correct_group;
        correctly_grouped_messages += members.size();
        // The group's text is taken from its lowest line id, which keeps the
        // check independent of input row order.
        if (row_text.at(members.front()) == *it->second) ++report.n_correct_template;
    }

    size_t correctly_parsed_messages = 0;
    for (const auto& p : parsed)
        if (row_text.at(p.line_id) == truth_text.at(p.line_id)) ++correctly_parsed_messages;

    const auto ratio = [](size_t num, size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    const auto harmonic = [](double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; };

    report.ga = ratio(correctly_grouped_messages, parsed.size());
    report.pa = ratio(correctly_parsed_messages, parsed.size());
    report.pga = ratio(report.n_correct_group, report.n_parsed_templates);
    report.rga = ratio(report.n_correct_group, report.n_gt_templates);
    report.fga = harmonic(report.pga, report.rga);
    report.pta = ratio(report.n_correct_template, report.n_parsed_templates);
    report.rta = ratio(report.n_correct_template, report.n_gt_templates);
    report.fta = harmonic(report.pta, report.rta);
    return report;
}

inline double grouping_accuracy(const std::vector<ParsedMessage>& parsed, const GroundTruth& truth,
                                const Config& cfg) {
    return evaluate_metrics(parsed, truth, cfg).ga;
}

inline std::tuple<double, double, double> f1_grouping(const std::vector<ParsedMessage>& parsed,
                                                      const GroundTruth& truth, const Config& cfg) {
    const auto report = evaluate_metrics(parsed, truth, cfg);
    return {report.pga, report.rga, report.fga};
}

inline double parsing_accuracy(const std::vector<ParsedMessage>& parsed, const GroundTruth& truth,
                               const Config& cfg) {
    return evaluate_metrics(parsed, truth, cfg).pa;
}

inline std::tuple<double, double, double> f1_template(const std::vector<ParsedMessage>& parsed,
                                                      const GroundTruth& truth, const Config& cfg) {
    const auto report = evaluate_metrics(parsed, truth, cfg);
    return {report.pta, report.rta, report.fta};
}

}  // namespace logtemplar
