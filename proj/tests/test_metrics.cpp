#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "logtemplar/metrics.hpp"
#include "oracle_helpers.hpp"

using namespace logtemplar;

namespace {

const Config kCfg;

struct Fixture {
    std::vector<ParsedMessage> parsed;
    GroundTruth truth;
};

// Random run generator: truth groups from a small template pool, parsed
// groups derived by randomly splitting/merging and perturbing text.
Fixture random_run(std::mt19937_64& rng, size_t max_messages) {
    Fixture fx;
    const size_t n = rng() % max_messages + 1;
    const size_t n_truth = rng() % 8 + 1;
    std::vector<std::string> truth_texts;
    for (size_t t = 0; t < n_truth; ++t)
        truth_texts.push_back("group " + std::to_string(t) + " took <*> ms");

    std::vector<size_t> truth_of(n);
    for (size_t i = 0; i < n; ++i) {
        truth_of[i] = rng() % n_truth;
        fx.truth.emplace_back(i, truth_texts[truth_of[i]]);
    }
    // Parsed ids: mostly follow the truth group, sometimes split in two,
    // sometimes collapse neighboring groups.
    std::vector<int> id_of_group(n_truth);
    std::vector<int> split_of_group(n_truth);
    std::vector<bool> text_wrong(n_truth);
    for (size_t t = 0; t < n_truth; ++t) {
        id_of_group[t] = static_cast<int>(rng() % (n_truth + 2));
        split_of_group[t] = (rng() % 3 == 0) ? static_cast<int>(100 + t) : id_of_group[t];
        text_wrong[t] = rng() % 4 == 0;
    }
    for (size_t i = 0; i < n; ++i) {
        const size_t t = truth_of[i];
        const int id = (rng() % 2 == 0) ? id_of_group[t] : split_of_group[t];
        std::string text = text_wrong[t] ? "wrong " + std::to_string(t) + " text" : truth_texts[t];
        fx.parsed.push_back(ParsedMessage{i, id, std::move(text)});
    }
    return fx;
}

}  // namespace

TEST_CASE("grouping accuracy fundamentals", "[metrics]") {
    // Perfect grouping scores 1 even with different template text.
    Fixture fx;
    fx.parsed = {{0, 7, "x"}, {1, 9, "y"}};
    fx.truth = {{0, "a <*>"}, {1, "b <*>"}};
    REQUIRE(grouping_accuracy(fx.parsed, fx.truth, kCfg) == 1.0);

    // Merging two truth groups zeroes GA for every message involved.
    fx.parsed = {{0, 1, "x"}, {1, 1, "x"}, {2, 1, "x"}};
    fx.truth = {{0, "a"}, {1, "a"}, {2, "b"}};
    REQUIRE(grouping_accuracy(fx.parsed, fx.truth, kCfg) == 0.0);
}

TEST_CASE("fga follows the harmonic mean formula", "[metrics]") {
    // N_g = 2, N_p = 4, N_c = 1 -> PGA = 0.25, RGA = 0.5, FGA = 1/3.
    Fixture fx;
    fx.truth = {{0, "a <*>"}, {1, "a <*>"}, {2, "b <*>"}, {3, "b <*>"}, {4, "b <*>"}};
    fx.parsed = {{0, 1, "a <*>"}, {1, 1, "a <*>"}, {2, 2, "b"}, {3, 3, "b"}, {4, 4, "b"}};
    const auto [pga, rga, fga] = f1_grouping(fx.parsed, fx.truth, kCfg);
    REQUIRE(pga == 0.25);
    REQUIRE(rga == 0.5);
    REQUIRE(fga == Catch::Approx(1.0 / 3.0));

    // Zero correct groups pin FGA at its 0 convention.
    fx.truth = {{0, "a"}, {1, "b"}};
    fx.parsed = {{0, 1, "a"}, {1, 1, "a"}};
    REQUIRE(std::get<2>(f1_grouping(fx.parsed, fx.truth, kCfg)) == 0.0);
}

TEST_CASE("perfect runs score 1 on every metric", "[metrics]") {
    Fixture fx;
    fx.truth = {{0, "a <*>"}, {1, "a <*>"}, {2, "b end"}};
    fx.parsed = {{0, 5, "a <*>"}, {1, 5, "a <*>"}, {2, 9, "b end"}};
    const auto report = evaluate_metrics(fx.parsed, fx.truth, kCfg);
    REQUIRE(report.ga == 1.0);
    REQUIRE(report.fga == 1.0);
    REQUIRE(report.pa == 1.0);
    REQUIRE(report.fta == 1.0);
}

TEST_CASE("parsing accuracy counts exact template text per message", "[metrics]") {
    Fixture fx;
    fx.truth = {{0, "User <*> log in"}, {1, "User <*> log in"}, {2, "User <*> log in"}, {3, "x y"}};
    fx.parsed = {{0, 1, "User <*> log in"},
                 {1, 1, "User <*> log in"},
                 {2, 1, "User <*> log in"},
                 {3, 2, "User admin log in"}};
    REQUIRE(parsing_accuracy(fx.parsed, fx.truth, kCfg) == 0.75);
}

TEST_CASE("canonicalization ignores whitespace cosmetics", "[metrics]") {
    Fixture fx;
    fx.truth = {{0, "User  <*>   log in"}};
    fx.parsed = {{0, 1, "User <*> log in"}};
    REQUIRE(parsing_accuracy(fx.parsed, fx.truth, kCfg) == 1.0);
}

TEST_CASE("group-correct but text-wrong counts for FGA not FTA", "[metrics]") {
    Fixture fx;
    fx.truth = {{0, "User <*> log in"}, {1, "User <*> log in"}};
    fx.parsed = {{0, 1, "User admin log in"}, {1, 1, "User admin log in"}};
    const auto report = evaluate_metrics(fx.parsed, fx.truth, kCfg);
    REQUIRE(report.n_correct_group == 1);
    REQUIRE(report.n_correct_template == 0);
    REQUIRE(report.fga > report.fta);
    REQUIRE(report.fta == 0.0);
}

TEST_CASE("empty runs score zero template metrics and vacuous message metrics", "[metrics]") {
    const auto report = evaluate_metrics({}, {}, kCfg);
    REQUIRE(report.ga == 1.0);
    REQUIRE(report.pa == 1.0);
    REQUIRE(report.fga == 0.0);
    REQUIRE(report.fta == 0.0);
    REQUIRE(report.n_messages == 0);
}

TEST_CASE("mismatched line id sets are a hard error", "[metrics]") {
    std::vector<ParsedMessage> parsed = {{0, 1, "a"}};
    GroundTruth truth = {{1, "a"}};
    REQUIRE_THROWS_AS(evaluate_metrics(parsed, truth, kCfg), MetricInputMismatch);
    truth = {{0, "a"}, {1, "a"}};
    REQUIRE_THROWS_AS(evaluate_metrics(parsed, truth, kCfg), MetricInputMismatch);
}

TEST_CASE("metrics agree with the brute-force reference", "[metrics]") {
    std::mt19937_64 rng(47);
    for (int round = 0; round < 150; ++round) {
        const auto fx = random_run(rng, 400);
        const auto report = evaluate_metrics(fx.parsed, fx.truth, kCfg);
        const auto ref = oracle::metrics_reference(fx.parsed, fx.truth, kCfg);
        REQUIRE(report.ga == Catch::Approx(ref.ga));
        REQUIRE(report.pa == Catch::Approx(ref.pa));
        REQUIRE(report.n_gt_templates == ref.n_g);
        REQUIRE(report.n_parsed_templates == ref.n_p);
        REQUIRE(report.n_correct_group == ref.n_c);
        REQUIRE(report.n_correct_template == ref.n_correct_template);
        REQUIRE(report.fta <= report.fga + 1e-12);
        for (double v : {report.ga, report.fga, report.pa, report.fta})
            REQUIRE((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("metrics are invariant to template id relabeling", "[metrics]") {
    std::mt19937_64 rng(53);
    const auto fx = random_run(rng, 200);
    auto relabeled = fx.parsed;
    for (auto& p : relabeled) p.template_id = p.template_id * 7 + 1000;
    const auto a = evaluate_metrics(fx.parsed, fx.truth, kCfg);
    const auto b = evaluate_metrics(relabeled, fx.truth, kCfg);
    REQUIRE(a.ga == b.ga);
    REQUIRE(a.fga == b.fga);
    REQUIRE(a.pa == b.pa);
    REQUIRE(a.fta == b.fta);
}
