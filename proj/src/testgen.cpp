#include "tinyalign/testgen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tinyalign/util.hpp"

namespace tinyalign {

Vocab toy_vocab(int n_regular_tokens) {
    std::vector<std::string> tokens{"<bos>", "<eos>"};
    for (int i = 0; i < n_regular_tokens; ++i) tokens.emplace_back(1, static_cast<char>('a' + i));
    return Vocab::from_tokens(std::move(tokens));
}

LanguageModel random_neural_model(const Vocab& vocab, int context_window, int dim, int hidden,
                                  uint64_t seed, double stddev) {
    NeuralParams p = NeuralParams::random_init(vocab.size(), context_window, dim, hidden, stddev, seed);
    // randomize biases too so tables are fully generic
    std::mt19937_64 rng(derive_seed(seed, 0xb1a5));
    std::normal_distribution<double> gauss(0.0, stddev);
    for (double& b : p.hidden_b()) b = gauss(rng);
    for (double& b : p.out_b()) b = gauss(rng);
    return LanguageModel::make_neural(vocab, std::move(p));
}

LanguageModel random_ngram_model(const Vocab& vocab, int order, uint64_t seed) {
    std::mt19937_64 rng(seed);
    NGramParams p;
    p.order = order;
    p.smoothing = 0.25 + uniform01(rng);
    const int v = vocab.size();
    // a handful of random contexts with random counts; everything else
    // falls back to the uniform smoothed distribution
    int n_contexts = 3 + static_cast<int>(rng() % 5);
    for (int c = 0; c < n_contexts; ++c) {
        Sequence ctx;
        for (int i = 0; i < order - 1; ++i) ctx.push_back(static_cast<TokenId>(rng() % v));
        std::vector<double> row(static_cast<size_t>(v));
        for (double& x : row) x = static_cast<double>(rng() % 12);
        p.counts[std::move(ctx)] = std::move(row);
    }
    return LanguageModel::make_ngram(vocab, std::move(p));
}

ModelPair random_model_pair(uint64_t seed) {
    std::mt19937_64 rng(seed);
    int v = 2 + static_cast<int>(rng() % 4);  // 4..7 tokens incl. reserved
    Vocab vocab = toy_vocab(v);
    bool use_ngram = rng() % 4 == 0;
    if (use_ngram) {
        int order = 2 + static_cast<int>(rng() % 2);
        return {random_ngram_model(vocab, order, derive_seed(seed, 1)),
                random_ngram_model(vocab, order, derive_seed(seed, 2))};
    }
    int k = 1 + static_cast<int>(rng() % 3);
    int dim = 2 + static_cast<int>(rng() % 3);
    int hidden = 3 + static_cast<int>(rng() % 5);
    return {random_neural_model(vocab, k, dim, hidden, derive_seed(seed, 3)),
            random_neural_model(vocab, k, dim, hidden, derive_seed(seed, 4))};
}

Sequence random_context(const Vocab& vocab, uint64_t seed, int max_len) {
    std::mt19937_64 rng(seed);
    int len = static_cast<int>(rng() % static_cast<uint64_t>(max_len + 1));
    Sequence ctx;
    for (int i = 0; i < len; ++i)
        ctx.push_back(static_cast<TokenId>(rng() % static_cast<uint64_t>(vocab.size())));
    return ctx;
}

LanguageModel fixed_distribution_model(const Vocab& vocab, const std::vector<double>& probs) {
    if (static_cast<int>(probs.size()) != vocab.size())
        throw std::invalid_argument("probability vector size mismatch");
    NeuralParams p = NeuralParams::zeros(vocab.size(), 1, 1, 1);
    auto bias = p.out_b();
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) throw std::invalid_argument("probabilities must be positive");
        bias[i] = std::log(probs[i]);
    }
    return LanguageModel::make_neural(vocab, std::move(p));
}

}  // namespace tinyalign
