#pragma once

#include <cstdint>
#include <vector>

#include "tinyalign/model.hpp"

namespace tinyalign {

enum class DecodeMode { greedy, sample };

struct DecodeConfig {
    double alpha = 0.4;               // contrast weight; 1 recovers standard decoding
    double lambda = 0.1;              // pruning threshold relative to the step max
    double repetition_penalty = 1.2;  // >= 1; 1 disables
    int max_len = 32;
    double temperature = 1.0;
    DecodeMode mode = DecodeMode::greedy;
    uint64_t seed = 0;

    void validate() const;
};

// Standard decoding from a single model. Greedy mode ignores the seed and
// breaks ties toward the lowest token id; sample mode draws from
// softmax(logp / temperature) with a seeded engine. temperature 0 in sample
// mode degenerates to greedy.
Sequence sample_standard(const LanguageModel& model, const Sequence& prompt, const DecodeConfig& cfg);

// Head set {v : p(v) >= lambda * max_w p(w)} under the aligned model's
// next-token probabilities. Never empty: the argmax always qualifies.
std::vector<TokenId> prune_vocab(const std::vector<double>& pi_r_probs, double lambda);

// Contrastive scores before the repetition penalty:
//   (1-alpha) * log(pi_r/pi_ref) + alpha * log pi_r   inside the head set,
//   -inf outside.
std::vector<double> cd_logits(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                              const Sequence& context, const DecodeConfig& cfg);

// CTRL-style penalty on tokens already generated in this response: positive
// finite scores are divided by `penalty`, non-positive ones multiplied.
// -inf entries stay -inf.
std::vector<double> apply_repetition_penalty(std::vector<double> scores,
                                             const Sequence& generated_so_far, double penalty);

// softmax of the penalized contrastive scores; exactly zero outside the head
// set.
std::vector<double> cd_next_token_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                               const Sequence& context, const Sequence& generated_so_far,
                                               const DecodeConfig& cfg);

// Contrastive generation. Stops at EOS (kept as the final element) or at
// cfg.max_len. Pure function of (models, prompt, cfg).
Sequence cd_generate(const LanguageModel& pi_r, const LanguageModel& pi_ref, const Sequence& prompt,
                     const DecodeConfig& cfg);

// Shared helpers.
TokenId argmax_lowest_id(const std::vector<double>& scores);
void require_same_vocab(const LanguageModel& a, const LanguageModel& b);

}  // namespace tinyalign
