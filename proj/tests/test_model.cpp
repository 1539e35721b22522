#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "tinyalign/decode.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/testgen.hpp"
#include "tinyalign/util.hpp"

using namespace tinyalign;

TEST_CASE("zero-initialized neural model is uniform") {
    Vocab v = toy_vocab(5);
    LanguageModel m = LanguageModel::make_neural(v, NeuralParams::zeros(v.size(), 3, 4, 6));
    std::vector<double> lp = logprobs(m, {});
    for (double x : lp) CHECK(x == doctest::Approx(-std::log(7.0)).epsilon(1e-14));
}

TEST_CASE("ngram additive smoothing matches the hand oracle") {
    // two-token vocabulary, counts 3 and 1, delta = 1
    Vocab v = toy_vocab(0);
    NGramParams p;
    p.order = 2;
    p.smoothing = 1.0;
    p.counts[{Vocab::kBos}] = {3.0, 1.0};
    LanguageModel m = LanguageModel::make_ngram(v, std::move(p));

    std::vector<double> lp = logprobs(m, {Vocab::kBos});
    CHECK(std::exp(lp[0]) == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
    CHECK(std::exp(lp[1]) == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("ngram probabilities stay finite on unseen contexts") {
    Vocab v = toy_vocab(3);
    LanguageModel m = random_ngram_model(v, 2, 17);
    std::vector<double> lp = logprobs(m, {static_cast<TokenId>(2)});
    for (double x : lp) CHECK(std::isfinite(x));
}

TEST_CASE("logprobs normalize for 1000 random model/context pairs") {
    for (uint64_t i = 0; i < 1000; ++i) {
        ModelPair pair = random_model_pair(derive_seed(3, i));
        Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(4, i));
        std::vector<double> lp = logprobs(pair.pi_r, ctx);
        CHECK(std::abs(logsumexp(lp)) < 1e-12);
    }
}

TEST_CASE("logprobs are pure: repeated evaluation is bit-identical") {
    ModelPair pair = random_model_pair(42);
    Sequence ctx = random_context(pair.pi_r.vocab, 43);
    std::vector<double> a = logprobs(pair.pi_r, ctx);
    std::vector<double> b = logprobs(pair.pi_r, ctx);
    CHECK(a == b);
}

TEST_CASE("context is truncated to the trailing window") {
    Vocab v = toy_vocab(4);
    LanguageModel m = random_neural_model(v, 2, 3, 5, 7);
    Sequence long_ctx{2, 3, 4, 5, 2, 3};
    Sequence tail{2, 3};
    CHECK(logprobs(m, long_ctx) == logprobs(m, tail));
}

TEST_CASE("out-of-vocabulary ids are rejected") {
    Vocab v = toy_vocab(2);
    LanguageModel m = random_neural_model(v, 2, 3, 4, 11);
    CHECK_THROWS_WITH_AS(logprobs(m, Sequence{99}), "token out of vocabulary", std::out_of_range);
    CHECK_THROWS_WITH_AS(sequence_logprob(m, {}, Sequence{99}), "token out of vocabulary",
                         std::out_of_range);
}

TEST_CASE("sequence_logprob decomposes over steps") {
    ModelPair pair = random_model_pair(5);
    const LanguageModel& m = pair.pi_r;
    Sequence prompt = random_context(m.vocab, 6, 3);

    SUBCASE("single token equals the logprobs entry") {
        Sequence resp{Vocab::kEos};
        CHECK(sequence_logprob(m, prompt, resp) ==
              logprobs(m, prompt)[static_cast<size_t>(Vocab::kEos)]);
    }

    SUBCASE("two tokens sum the conditionals") {
        Sequence resp{2, 3};
        Sequence ctx1 = prompt;
        ctx1.push_back(2);
        double expected = logprobs(m, prompt)[2] + logprobs(m, ctx1)[3];
        CHECK(sequence_logprob(m, prompt, resp) == doctest::Approx(expected).epsilon(1e-15));
    }

    SUBCASE("empty response is rejected") {
        CHECK_THROWS_WITH_AS(sequence_logprob(m, prompt, {}), "empty response", std::invalid_argument);
    }
}

TEST_CASE("three-token response matches the chain-rule product oracle") {
    Vocab v = toy_vocab(1);  // V = 3
    LanguageModel m = random_neural_model(v, 2, 3, 4, 21);
    Sequence prompt{2};
    Sequence resp{2, 0, 2};

    // independent route: multiply step probabilities in probability space
    double product = 1.0;
    Sequence ctx = prompt;
    for (TokenId t : resp) {
        std::vector<double> lp = logprobs(m, ctx);
        double step = std::exp(lp[static_cast<size_t>(t)]);
        product *= step;
        ctx.push_back(t);
    }
    CHECK(sequence_logprob(m, prompt, resp) == doctest::Approx(std::log(product)).epsilon(1e-12));
    CHECK(sequence_logprob(m, prompt, resp) <= 1e-12);
}

TEST_CASE("decomposition holds for random sequences") {
    for (uint64_t i = 0; i < 50; ++i) {
        ModelPair pair = random_model_pair(derive_seed(8, i));
        Sequence prompt = random_context(pair.pi_r.vocab, derive_seed(9, i), 3);
        Sequence resp = random_context(pair.pi_r.vocab, derive_seed(10, i), 5);
        if (resp.empty()) resp.push_back(Vocab::kEos);
        double total = 0.0;
        Sequence ctx = prompt;
        for (TokenId t : resp) {
            total += logprobs(pair.pi_r, ctx)[static_cast<size_t>(t)];
            ctx.push_back(t);
        }
        CHECK(std::abs(sequence_logprob(pair.pi_r, prompt, resp) - total) < 1e-12);
    }
}

TEST_CASE("greedy standard decoding follows the stepwise argmax") {
    ModelPair pair = random_model_pair(33);
    DecodeConfig cfg;
    cfg.mode = DecodeMode::greedy;
    cfg.max_len = 6;
    Sequence prompt = random_context(pair.pi_r.vocab, 34, 2);
    Sequence got = sample_standard(pair.pi_r, prompt, cfg);

    Sequence want;
    Sequence ctx = prompt;
    for (int step = 0; step < cfg.max_len; ++step) {
        std::vector<double> lp = logprobs(pair.pi_r, ctx);
        TokenId best = 0;
        for (size_t i = 1; i < lp.size(); ++i)
            if (lp[i] > lp[static_cast<size_t>(best)]) best = static_cast<TokenId>(i);
        want.push_back(best);
        ctx.push_back(best);
        if (best == Vocab::kEos) break;
    }
    CHECK(got == want);
}

TEST_CASE("sampling is deterministic given the seed") {
    ModelPair pair = random_model_pair(35);
    DecodeConfig cfg;
    cfg.mode = DecodeMode::sample;
    cfg.temperature = 1.0;
    cfg.max_len = 8;
    cfg.seed = 1234;
    Sequence prompt = random_context(pair.pi_r.vocab, 36, 2);
    CHECK(sample_standard(pair.pi_r, prompt, cfg) == sample_standard(pair.pi_r, prompt, cfg));
}

TEST_CASE("first-token sampling frequency matches the model distribution") {
    Vocab v = toy_vocab(0);
    LanguageModel m = fixed_distribution_model(v, {0.7, 0.3});
    DecodeConfig cfg;
    cfg.mode = DecodeMode::sample;
    cfg.temperature = 1.0;
    cfg.max_len = 1;

    int hits = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        cfg.seed = static_cast<uint64_t>(i);
        Sequence out = sample_standard(m, {}, cfg);
        REQUIRE(out.size() == 1);
        if (out[0] == 0) ++hits;
    }
    double freq = static_cast<double>(hits) / draws;
    CHECK(freq == doctest::Approx(0.7).epsilon(0.03));
    CHECK(std::abs(freq - 0.7) < 0.02);
}

TEST_CASE("negative temperature is rejected") {
    ModelPair pair = random_model_pair(37);
    DecodeConfig cfg;
    cfg.temperature = -0.5;
    CHECK_THROWS_WITH_AS(sample_standard(pair.pi_r, {}, cfg), "invalid temperature",
                         std::invalid_argument);
}
