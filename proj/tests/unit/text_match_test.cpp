#include "qibitz/text_match.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <tuple>

using namespace qibitz::text;

TEST_CASE("normalization folds case and collapses punctuation runs") {
    const auto n = normalize_for_phrase("Acetylsalicylic--ACID, (aspirin)");
    CHECK(n.text == "acetylsalicylic acid aspirin");
    REQUIRE(n.origin.size() == n.text.size());
    CHECK(n.origin[0] == 0);
    CHECK(normalize_phrase("N-acetylcysteine") == "n acetylcysteine");
    CHECK(normalize_phrase("  vitamin   D ") == "vitamin d");
}

TEST_CASE("non-ASCII bytes count as word bytes and are not folded") {
    CHECK(is_word_byte(0xC3));
    const auto n = normalize_for_phrase("\xC3\x89tude");
    CHECK(n.text == "\xC3\x89tude");
}

TEST_CASE("word tokens are lowercased maximal runs") {
    CHECK(word_tokens("Whole-genome ANALYSIS, 2x") == std::vector<std::string>{"whole", "genome", "analysis", "2x"});
    CHECK(word_tokens("").empty());
}

TEST_CASE("boundary check treats string edges and punctuation as boundaries") {
    CHECK(bounded_by_non_word("VHL", 0, 3));
    CHECK(bounded_by_non_word("the VHL-gene", 4, 7));
    CHECK_FALSE(bounded_by_non_word("VHLs", 0, 3));
    CHECK_FALSE(bounded_by_non_word("aVHL", 1, 4));
}

TEST_CASE("empty automaton reports nothing") {
    PatternSet empty;
    int hits = 0;
    empty.for_each_match("anything", [&](auto, auto, auto) { ++hits; });
    CHECK(hits == 0);
}

TEST_CASE("automaton reports overlapping and nested occurrences") {
    PatternSet set({"he", "she", "his", "hers"});
    std::set<std::tuple<std::uint32_t, std::size_t, std::size_t>> got;
    set.for_each_match("ushers", [&](std::uint32_t id, std::size_t b, std::size_t e) { got.insert({id, b, e}); });
    const std::set<std::tuple<std::uint32_t, std::size_t, std::size_t>> want = {{1, 1, 4}, {0, 2, 4}, {3, 2, 6}};
    CHECK(got == want);
}

TEST_CASE("property: automaton agrees with naive substring search") {
    std::mt19937_64 rng(42);
    const std::string alphabet = "abc ";
    auto random_string = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i)
            s += alphabet[rng() % alphabet.size()];
        return s;
    };
    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> patterns;
        const std::size_t k = 1 + rng() % 6;
        for (std::size_t i = 0; i < k; ++i)
            patterns.push_back(random_string(1 + rng() % 4));
        const std::string hay = random_string(rng() % 60);

        std::set<std::tuple<std::uint32_t, std::size_t, std::size_t>> naive, fast;
        for (std::uint32_t id = 0; id < patterns.size(); ++id) {
            for (std::size_t pos = hay.find(patterns[id]); pos != std::string::npos; pos = hay.find(patterns[id], pos + 1))
                naive.insert({id, pos, pos + patterns[id].size()});
        }
        PatternSet(patterns).for_each_match(hay, [&](std::uint32_t id, std::size_t b, std::size_t e) {
            fast.insert({id, b, e});
        });
        REQUIRE(naive == fast);
    }
}
