#include <doctest.h>

#include <stdexcept>

#include <set>

#include "tinyalign/corpus.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/util.hpp"

using namespace tinyalign;

TEST_CASE("build_vocab collects distinct characters plus reserved tokens") {
    Vocab v = build_vocab("abba");
    CHECK(v.size() == 4);
    CHECK(v.tokens()[0] == "<bos>");
    CHECK(v.tokens()[1] == "<eos>");
    CHECK(v.tokens()[2] == "a");
    CHECK(v.tokens()[3] == "b");

    CHECK(build_vocab("aaaa").size() == 3);
}

TEST_CASE("build_vocab on the full toy corpus matches an independent distinct count") {
    std::vector<std::string> lines = make_corpus(1, 1200);
    std::string joined;
    for (const std::string& l : lines) joined += l;

    std::set<char> distinct(joined.begin(), joined.end());
    Vocab v = build_vocab(joined);
    CHECK(v.size() == static_cast<int>(distinct.size()) + 2);
    CHECK(v.size() == 14);
}

TEST_CASE("build_vocab rejects an empty corpus") {
    CHECK_THROWS_WITH_AS(build_vocab(""), "empty corpus", std::invalid_argument);
}

TEST_CASE("vocab ordering is deterministic and sorted by code point") {
    Vocab v = build_vocab("cba");
    CHECK(v.tokens() == std::vector<std::string>{"<bos>", "<eos>", "a", "b", "c"});
    CHECK(v.id_of('a') == 2);
    CHECK(v.id_of('c') == 4);
}

TEST_CASE("tokenizer round-trips arbitrary corpus text") {
    std::vector<std::string> lines = make_corpus(7, 50);
    std::string joined;
    for (const std::string& l : lines) joined += l + " ";
    Vocab v = build_vocab(joined);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        size_t start = rng() % joined.size();
        size_t len = rng() % (joined.size() - start);
        std::string text = joined.substr(start, len);
        CHECK(v.decode(v.encode(text)) == text);
    }
}

TEST_CASE("decode skips reserved tokens") {
    Vocab v = build_vocab("ab");
    Sequence ids{Vocab::kBos, v.id_of('a'), v.id_of('b'), Vocab::kEos};
    CHECK(v.decode(ids) == "ab");
}

TEST_CASE("encode rejects characters outside the vocabulary") {
    Vocab v = build_vocab("ab");
    CHECK_THROWS_WITH_AS(v.encode("abc"), "token out of vocabulary", std::out_of_range);
}
