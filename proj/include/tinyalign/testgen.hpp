#pragma once

#include <cstdint>
#include <vector>

#include "tinyalign/model.hpp"

namespace tinyalign {

// Random instance generators for property checks. Everything is a pure
// function of the seed.

Vocab toy_vocab(int n_regular_tokens);  // "<bos>","<eos>" plus 'a', 'b', ...

LanguageModel random_neural_model(const Vocab& vocab, int context_window, int dim, int hidden,
                                  uint64_t seed, double stddev = 0.6);

LanguageModel random_ngram_model(const Vocab& vocab, int order, uint64_t seed);

// Model pair over a shared small vocabulary; mixes neural and ngram kinds.
struct ModelPair {
    LanguageModel pi_r;
    LanguageModel pi_ref;
};
ModelPair random_model_pair(uint64_t seed);

Sequence random_context(const Vocab& vocab, uint64_t seed, int max_len = 6);

// Model whose next-token distribution is exactly `probs` in every context
// (softmax over output biases; weights zero).
LanguageModel fixed_distribution_model(const Vocab& vocab, const std::vector<double>& probs);

}  // namespace tinyalign
