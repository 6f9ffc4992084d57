// logtemplar: template extraction for log files with an adaptive parsing
// cache and a pluggable model backend. Subcommands: sample, parse,
// evaluate, stats.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "logtemplar/config.hpp"
#include "logtemplar/io.hpp"
#include "logtemplar/llm.hpp"
#include "logtemplar/manifest.hpp"
#include "logtemplar/metrics.hpp"
#include "logtemplar/pipeline.hpp"
#include "logtemplar/sampler.hpp"

namespace lt = logtemplar;
using millis = std::chrono::milliseconds;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitBackend = 3;
constexpr int kExitMetricMismatch = 4;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

millis elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<millis>(std::chrono::steady_clock::now() - start);
}

// Shared tuning options, registered per subcommand so `--help` shows every
// flag with its default. Precedence: flags > config file > built-ins.
// The --config value itself is consumed by a pre-scan before CLI11 runs;
// the option here makes it parse and show up in help.
void add_common_options(CLI::App* cmd, lt::Config& cfg, std::string& backend_name) {
    static std::string config_path_sink;
    cmd->add_option("--config", config_path_sink, "Flat key = value config file (flags take precedence)");
    cmd->add_option("--delimiters", cfg.delimiters,
                    "Tokenization delimiter characters; ' ' enables the whitespace class")
        ->capture_default_str();
    cmd->add_option("--top-k-tokens", cfg.top_k_tokens, "Top-K frequent tokens per cluster signature")
        ->capture_default_str();
    cmd->add_option("--candidates-count", cfg.candidate_count, "Number of candidates to sample (K_s)")
        ->capture_default_str();
    cmd->add_option("--demos", cfg.demo_count, "Demonstrations per query (k)")->capture_default_str();
    cmd->add_option("--merge-threshold", cfg.merge_threshold, "Similarity threshold for cache refinement")
        ->capture_default_str();
    cmd->add_option("--wildcard-max-span", cfg.wildcard_max_span, "Max tokens one <*> may match")
        ->capture_default_str();
    cmd->add_option("--sample-fraction", cfg.sample_fraction, "Head fraction of the dataset to sample from")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.rng_seed, "Root RNG seed")->capture_default_str();
    cmd->add_option("--backend", backend_name, "Backend kind")
        ->check(CLI::IsMember({"oracle", "noisy_oracle", "remote"}))
        ->capture_default_str();
    cmd->add_option("--endpoint", cfg.backend.endpoint, "Remote chat-completion endpoint URL")
        ->capture_default_str();
    cmd->add_option("--model", cfg.backend.model_name, "Remote model name")->capture_default_str();
    cmd->add_option("--temperature", cfg.backend.temperature, "Remote sampling temperature")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", [&cfg](const std::vector<std::string>& vals) {
            cfg.backend.timeout = millis(std::stoll(vals.at(0)));
            return true;
        },
        "Remote request timeout in milliseconds")->expected(1);
    cmd->add_option("--max-retries", cfg.backend.max_retries, "Remote attempts per query")
        ->capture_default_str();
    cmd->add_option("--noise-rate", cfg.backend.noise_rate, "Corruption probability (noisy_oracle)")
        ->capture_default_str();
    cmd->add_flag("!--no-adaptive-updates", cfg.adaptive_updates,
                  "Disable cache refinement (every update inserts)");
}

void finish_config(lt::Config& cfg, const std::string& backend_name) {
    cfg.backend.kind = lt::backend_kind_from_string(backend_name);
    cfg.backend.rng_seed = cfg.rng_seed;
    cfg.validate();
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(const std::string& dataset_path, const std::string& output_path, lt::Config cfg) {
    const auto start = std::chrono::steady_clock::now();
    const auto records = lt::load_dataset(dataset_path);
    const auto slice = lt::sampling_slice(records, cfg.sample_fraction);
    const auto candidates = lt::sample_candidates(slice, cfg);
    lt::write_candidates(output_path, candidates);

    lt::RunManifest manifest;
    manifest.config = cfg;
    manifest.dataset_path = dataset_path;
    manifest.dataset_hash = lt::hash_file(dataset_path);
    manifest.candidates_path = output_path;
    manifest.candidates_hash = lt::hash_file(output_path);
    manifest.sampling_time = elapsed_ms(start);
    manifest.total_time = manifest.sampling_time;
    lt::write_manifest(output_path + ".manifest.json", manifest);

    size_t labeled = 0;
    for (const auto& c : candidates.entries) labeled += c.label.has_value();
    std::cout << "sampled " << candidates.entries.size() << " candidates (" << labeled
              << " labeled) from " << slice.size() << " of " << records.size() << " records -> "
              << output_path << "\n";
    if (labeled < candidates.entries.size())
        std::cout << "note: fill the empty Label column before parsing\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// parse

int cmd_parse(const std::string& dataset_path, const std::string& candidates_path,
              const std::string& output_path, const std::string& cache_in,
              const std::string& cache_out, lt::Config cfg) {
    const auto start = std::chrono::steady_clock::now();
    const auto records = lt::load_dataset(dataset_path);
    const auto pool = lt::load_candidates(candidates_path, cfg);

    if (cfg.backend.kind == lt::BackendDescriptor::Kind::Remote && !pool.fully_labeled())
        throw std::runtime_error(candidates_path +
                                 ": candidates must all be labeled for the remote backend");
    if (cfg.backend.kind != lt::BackendDescriptor::Kind::Remote) {
        for (const auto& record : records)
            if (!record.ground_truth)
                throw std::runtime_error(dataset_path + ": record " + std::to_string(record.line_id) +
                                         " lacks EventTemplate, required by mock backends");
    }

    lt::CacheTree warm;
    if (!cache_in.empty()) warm = lt::CacheTree::import_snapshot(read_text_file(cache_in), cfg);

    const auto backend = lt::make_backend(cfg);
    auto run = lt::parse_stream(records, pool, cfg, *backend, std::move(warm));

    // Rows in input order; template text comes from the final cache so
    // refined groups render consistently.
    std::map<int, std::string> final_text;
    for (const auto& [id, tmpl] : run.cache.templates()) final_text.emplace(id, tmpl.raw());
    std::vector<lt::ParsedMessage> rows;
    rows.reserve(records.size());
    for (const auto& record : records) {
        const int id = run.assignments.at(record.line_id);
        rows.push_back(lt::ParsedMessage{record.line_id, id, final_text.at(run.resolve(id))});
    }
    lt::write_assignments(output_path, rows);

    const std::string snapshot = run.cache.export_snapshot();
    if (!cache_out.empty()) {
        std::ofstream out(cache_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + cache_out);
        out << snapshot;
    }

    const auto total = elapsed_ms(start);
    lt::RunManifest manifest;
    manifest.config = cfg;
    manifest.dataset_path = dataset_path;
    manifest.dataset_hash = lt::hash_file(dataset_path);
    manifest.candidates_path = candidates_path;
    manifest.candidates_hash = lt::hash_file(candidates_path);
    manifest.queries = run.stats.total_queries;
    manifest.failures = run.stats.failures;
    manifest.fallbacks = run.fallbacks;
    manifest.cache_time = std::chrono::duration_cast<millis>(run.cache_time);
    manifest.query_time = std::chrono::duration_cast<millis>(run.query_time);
    manifest.total_time = total;
    manifest.assignments_hash = lt::hash_file(output_path);
    manifest.cache_hash = lt::fnv1a_hex(snapshot);
    lt::write_manifest(output_path + ".manifest.json", manifest);

    lt::append_stats_line(output_path + ".stats.jsonl",
                          {{"event", "parse"},
                           {"messages", records.size()},
                           {"templates", run.cache.template_count()},
                           {"queries", run.stats.total_queries},
                           {"failures", run.stats.failures},
                           {"fallbacks", run.fallbacks},
                           {"cache_ms", std::chrono::duration_cast<millis>(run.cache_time).count()},
                           {"query_ms", std::chrono::duration_cast<millis>(run.query_time).count()},
                           {"wall_ms", total.count()}});

    std::cout << "parsed " << records.size() << " messages into " << run.cache.template_count()
              << " templates (" << run.stats.total_queries << " queries, " << run.fallbacks
              << " fallbacks) -> " << output_path << "\n";

    if (cfg.backend.kind == lt::BackendDescriptor::Kind::Remote && run.stats.total_queries > 0 &&
        run.stats.failures == run.stats.total_queries) {
        std::cerr << "error: every backend query failed after retries\n";
        return kExitBackend;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& parsed_path, const std::string& truth_path,
                 const std::string& json_path, const lt::Config& cfg) {
    const auto parsed = lt::load_assignments(parsed_path, cfg);
    const auto truth = lt::load_ground_truth(truth_path);
    const auto report = lt::evaluate_metrics(parsed, truth, cfg);

    if (report.n_messages == 0) std::cout << "warning: empty run, message metrics are vacuous\n";

    const auto pct = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
        return std::string(buf);
    };
    std::printf("%-8s%-8s%-8s%-8s\n", "GA", "FGA", "PA", "FTA");
    std::printf("%-8s%-8s%-8s%-8s\n", pct(report.ga).c_str(), pct(report.fga).c_str(),
                pct(report.pa).c_str(), pct(report.fta).c_str());

    const nlohmann::json json = {
        {"ga", report.ga},         {"fga", report.fga},
        {"pa", report.pa},         {"fta", report.fta},
        {"pga", report.pga},       {"rga", report.rga},
        {"pta", report.pta},       {"rta", report.rta},
        {"n_messages", report.n_messages},
        {"n_gt_templates", report.n_gt_templates},
        {"n_parsed_templates", report.n_parsed_templates},
        {"n_correct_group", report.n_correct_group},
        {"n_correct_template", report.n_correct_template},
    };
    if (json_path.empty() || json_path == "-") {
        std::cout << json.dump() << "\n";
    } else {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + json_path);
        out << json.dump(2) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(const std::string& manifest_path, bool as_json) {
    const auto manifest = lt::load_manifest(manifest_path);
    if (as_json) {
        std::cout << manifest.dump(2) << "\n";
        return kExitOk;
    }
    const auto& counters = manifest.at("counters");
    const auto& timings = manifest.at("timings_ms");
    const double cache_ms = timings.value("cache_ops", 0.0);
    const double query_ms = timings.value("query", 0.0);
    const double known = cache_ms + query_ms;

    std::cout << "run " << manifest.value("fingerprint", std::string("?")) << " ("
              << manifest.value("version", std::string("?")) << ")\n";
    std::printf("  queries    %llu\n",
                static_cast<unsigned long long>(counters.value("queries", 0ull)));
    std::printf("  failures   %llu\n",
                static_cast<unsigned long long>(counters.value("failures", 0ull)));
    std::printf("  fallbacks  %llu\n",
                static_cast<unsigned long long>(counters.value("fallbacks", 0ull)));
    std::printf("  sampling   %lld ms\n", static_cast<long long>(timings.value("sampling", 0ll)));
    std::printf("  cache ops  %.0f ms (%.1f%% of accounted time)\n", cache_ms,
                known > 0 ? 100.0 * cache_ms / known : 0.0);
    std::printf("  querying   %.0f ms (%.1f%% of accounted time)\n", query_ms,
                known > 0 ? 100.0 * query_ms / known : 0.0);
    std::printf("  total      %lld ms\n", static_cast<long long>(timings.value("total", 0ll)));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    lt::Config cfg;

    // The config file loads first so command-line flags override its values.
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc) lt::load_config_file(argv[i + 1], cfg);
            else if (arg.starts_with("--config=")) lt::load_config_file(std::string(arg.substr(9)), cfg);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitIo;
        }
    }

    CLI::App app{"Log template extraction with an adaptive parsing cache"};
    app.require_subcommand(1);
    std::string config_path, backend_name = lt::to_string(cfg.backend.kind);
    app.add_option("--config", config_path, "Flat key = value config file (flags take precedence)");

    std::string dataset_path, candidates_path, output_path, cache_in, cache_out;
    std::string parsed_path, truth_path, json_path, manifest_path;
    std::string instruction_file, layout_file;
    bool stats_json = false;

    auto* sample = app.add_subcommand("sample", "Sample a labeled candidate set from a dataset head");
    sample->add_option("--dataset", dataset_path, "Dataset CSV (LineId, Content[, EventTemplate])")
        ->required();
    sample->add_option("--output", output_path, "Candidates CSV to write")->required();
    add_common_options(sample, cfg, backend_name);

    auto* parse = app.add_subcommand("parse", "Parse a dataset into templates");
    parse->add_option("--dataset", dataset_path, "Dataset CSV (LineId, Content[, EventTemplate])")
        ->required();
    parse->add_option("--candidates", candidates_path, "Candidates CSV from `sample`")->required();
    parse->add_option("--output", output_path, "Assignments CSV to write")->required();
    parse->add_option("--cache-in", cache_in, "Warm-start cache snapshot to load");
    parse->add_option("--cache-out", cache_out, "Write the final cache snapshot here");
    parse->add_option("--instruction-file", instruction_file, "Override the prompt instruction text");
    parse->add_option("--prompt-layout-file", layout_file,
                      "Prompt layout with {instruction}/{demonstrations}/{query} slots");
    add_common_options(parse, cfg, backend_name);

    auto* evaluate = app.add_subcommand("evaluate", "Score a parse output against ground truth");
    evaluate->add_option("--parsed", parsed_path, "Assignments CSV from `parse`")->required();
    evaluate->add_option("--truth", truth_path, "Dataset CSV with EventTemplate (or Template) column")
        ->required();
    evaluate->add_option("--json", json_path, "Write the JSON report here instead of stdout");
    evaluate->add_option("--delimiters", cfg.delimiters, "Tokenization delimiters for canonical rendering")
        ->capture_default_str();
    evaluate->add_option("--config", config_path, "Flat key = value config file (flags take precedence)");

    auto* stats = app.add_subcommand("stats", "Print the timing/query breakdown of a run manifest");
    stats->add_option("--manifest", manifest_path, "Manifest JSON written by `parse` or `sample`")
        ->required();
    stats->add_flag("--json", stats_json, "Dump the raw manifest JSON");
    stats->add_option("--config", config_path, "Flat key = value config file (flags take precedence)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sample->parsed()) {
            finish_config(cfg, backend_name);
            return cmd_sample(dataset_path, output_path, cfg);
        }
        if (parse->parsed()) {
            if (!instruction_file.empty()) cfg.instruction = read_text_file(instruction_file);
            if (!layout_file.empty()) cfg.prompt_layout = read_text_file(layout_file);
            finish_config(cfg, backend_name);
            return cmd_parse(dataset_path, candidates_path, output_path, cache_in, cache_out, cfg);
        }
        if (evaluate->parsed()) return cmd_evaluate(parsed_path, truth_path, json_path, cfg);
        if (stats->parsed()) return cmd_stats(manifest_path, stats_json);
    } catch (const lt::MetricInputMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMetricMismatch;
    } catch (const lt::AuthError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
