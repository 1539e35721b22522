#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "tinyalign/checkpoint.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/testgen.hpp"
#include "tinyalign/util.hpp"

using namespace tinyalign;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("neural checkpoint round-trips logprobs bit-identically") {
    Vocab v = toy_vocab(4);
    LanguageModel m = random_neural_model(v, 3, 4, 6, 123);
    std::string path = temp_path("tinyalign_ckpt_neural.json");
    save_checkpoint(m, path);
    LanguageModel back = load_checkpoint(path);

    CHECK(back.kind == ModelKind::neural);
    CHECK(back.vocab == m.vocab);
    CHECK(back.context_window == m.context_window);
    for (uint64_t i = 0; i < 20; ++i) {
        Sequence ctx = random_context(v, derive_seed(200, i));
        CHECK(logprobs(back, ctx) == logprobs(m, ctx));
    }
    std::remove(path.c_str());
}

TEST_CASE("ngram checkpoint round-trips logprobs bit-identically") {
    Vocab v = toy_vocab(3);
    LanguageModel m = random_ngram_model(v, 3, 321);
    std::string path = temp_path("tinyalign_ckpt_ngram.json");
    save_checkpoint(m, path);
    LanguageModel back = load_checkpoint(path);

    CHECK(back.kind == ModelKind::ngram);
    for (uint64_t i = 0; i < 20; ++i) {
        Sequence ctx = random_context(v, derive_seed(300, i));
        CHECK(logprobs(back, ctx) == logprobs(m, ctx));
    }
    std::remove(path.c_str());
}

TEST_CASE("string round-trip preserves parameters exactly") {
    Vocab v = toy_vocab(2);
    LanguageModel m = random_neural_model(v, 2, 3, 4, 55);
    LanguageModel back = checkpoint_from_string(checkpoint_to_string(m));
    CHECK(back.neural().data == m.neural().data);
}

TEST_CASE("unsupported format version is rejected") {
    Vocab v = toy_vocab(2);
    LanguageModel m = random_neural_model(v, 2, 3, 4, 56);
    std::string text = checkpoint_to_string(m);
    size_t pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"format_version\": 9");
    CHECK_THROWS(checkpoint_from_string(text));
}

TEST_CASE("missing checkpoint file is an error") {
    CHECK_THROWS(load_checkpoint("/nonexistent/path.ckpt"));
}
