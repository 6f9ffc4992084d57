#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "logtemplar/core.hpp"

using namespace logtemplar;

namespace {

// Character-scan reference for the separator rule: delimiters split, the
// non-whitespace ones survive as single-character tokens.
std::vector<std::string> scan_tokenize(std::string_view content, std::string_view delimiters) {
    const bool ws_class = delimiters.find(' ') != std::string_view::npos;
    std::vector<std::string> out;
    std::string cur;
    for (char c : content) {
        const bool ws = is_whitespace(c);
        const bool delim = ws ? (ws_class || delimiters.find(c) != std::string_view::npos)
                              : delimiters.find(c) != std::string_view::npos;
        if (!delim) {
            cur.push_back(c);
            continue;
        }
        if (!cur.empty()) out.push_back(std::exchange(cur, {}));
        if (!ws) out.push_back(std::string(1, c));
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string random_text(std::mt19937_64& rng, size_t max_len) {
    static constexpr std::string_view alphabet = "ab1 ,=:/._<*>()x";
    std::string s;
    const size_t len = rng() % max_len + 1;
    for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

}  // namespace

TEST_CASE("tokenize splits on whitespace", "[core]") {
    const auto tokens = tokenize("Starting reading data from /etc/data/", " ");
    REQUIRE(tokens == std::vector<std::string>{"Starting", "reading", "data", "from", "/etc/data/"});
}

TEST_CASE("tokenize single token", "[core]") {
    REQUIRE(tokenize("a", " ,=") == std::vector<std::string>{"a"});
}

TEST_CASE("tokenize keeps non-whitespace delimiters as tokens", "[core]") {
    const auto tokens = tokenize("key=value, done", " =,");
    REQUIRE(tokens == std::vector<std::string>{"key", "=", "value", ",", "done"});
    REQUIRE(tokens == scan_tokenize("key=value, done", " =,"));
}

TEST_CASE("tokenize never yields empty tokens and is deterministic", "[core]") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto text = random_text(rng, 40);
        const auto a = tokenize(text, " ,=:");
        const auto b = tokenize(text, " ,=:");
        REQUIRE(a == b);
        for (const auto& token : a) REQUIRE(!token.empty());
        REQUIRE(a == scan_tokenize(text, " ,=:"));
    }
}

TEST_CASE("special_format extracts non-alphanumeric non-whitespace characters", "[core]") {
    REQUIRE(special_format("Received block: blk_358 of size 6710 from /127.0.0.1") ==
            SpecialFormat{':', '_', '.', '/'});
    REQUIRE(special_format("hello world 123").empty());
    REQUIRE(special_format("a=b=c") == SpecialFormat{'='});
}

TEST_CASE("special_format is a subset of content characters", "[core]") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto text = random_text(rng, 40);
        for (char c : special_format(text)) {
            REQUIRE(text.find(c) != std::string::npos);
            REQUIRE(is_special_char(c));
        }
    }
}

TEST_CASE("feature_set combines token set and special characters", "[core]") {
    Config cfg;
    REQUIRE(feature_set("a b a", cfg) == FeatureSet{"a", "b"});
    REQUIRE(feature_set("User root failed", cfg) == FeatureSet{"User", "root", "failed"});
    REQUIRE(feature_set("open /tmp/x", cfg) == FeatureSet{"open", "/tmp/x", "/"});
}

TEST_CASE("feature_set ignores word order under whitespace-only delimiters", "[core]") {
    Config cfg;
    cfg.delimiters = " ";
    REQUIRE(feature_set("alpha beta gamma", cfg) == feature_set("gamma alpha beta", cfg));
}

TEST_CASE("template normalizes wildcards", "[core]") {
    Config cfg;
    const auto t = Template::parse("User <*> <*> login", cfg);
    REQUIRE(t.raw() == "User <*> login");  // adjacent wildcards collapse
    REQUIRE(t.size() == 3);
    REQUIRE(t.constant_count() == 2);
    REQUIRE(t.has_wildcard());

    REQUIRE_THROWS_AS(Template(std::vector<Token>{}), std::invalid_argument);
}

TEST_CASE("template canonical rendering joins by single spaces", "[core]") {
    Config cfg;
    const auto t = Template::parse("  key = <*>  ", cfg);
    REQUIRE(t.raw() == "key = <*>");
    // Re-parsing the canonical form is a fixed point.
    REQUIRE(Template::parse(t.raw(), cfg) == t);
}

TEST_CASE("config validation", "[core]") {
    Config cfg;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.demo_count = cfg.candidate_count + 1;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = Config{};
    cfg.delimiters = ",=";
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = Config{};
    cfg.merge_threshold = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}
