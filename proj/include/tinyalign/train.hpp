#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tinyalign/decode.hpp"
#include "tinyalign/model.hpp"

namespace tinyalign {

enum class LossKind { sft, dpo };

struct TrainConfig {
    double beta = 0.1;  // preference sharpness; DPO only
    double learning_rate = 0.05;
    int epochs = 1;
    int batch_size = 16;
    uint64_t seed = 0;

    void validate() const;
};

// (prompt x, chosen y_w, rejected y_l) with y_w preferred.
struct PreferencePair {
    Sequence prompt;
    Sequence chosen;
    Sequence rejected;

    bool operator==(const PreferencePair&) const = default;
};

struct SftExample {
    Sequence prompt;
    Sequence chosen;
};

using Grad = std::vector<double>;  // flat, same layout as NeuralParams::data

// loss = -mean over the batch of log pi(chosen | prompt), gradient by reverse
// accumulation through the shared embeddings.
std::pair<double, Grad> sft_loss_and_grad(const LanguageModel& model, std::span<const SftExample> batch);
double sft_loss(const LanguageModel& model, std::span<const SftExample> batch);

// loss = -mean log sigmoid(beta * (delta_w - delta_l)) with delta_* the
// policy-vs-reference sequence log-ratios. Gradient flows only through the
// policy.
std::pair<double, Grad> dpo_loss_and_grad(const LanguageModel& policy, const LanguageModel& reference,
                                          std::span<const PreferencePair> batch, double beta);
double dpo_loss(const LanguageModel& policy, const LanguageModel& reference,
                std::span<const PreferencePair> batch, double beta);

// Mini-batch gradient descent at fixed learning rate with seeded shuffling.
// If loss_log is given, entry 0 is the full-data loss before any update and
// one entry per epoch follows. Any non-finite loss aborts.
LanguageModel train_sft(LanguageModel model, const std::vector<SftExample>& data,
                        const TrainConfig& cfg, std::vector<double>* loss_log = nullptr);
LanguageModel train_dpo(LanguageModel model, const LanguageModel& reference,
                        const std::vector<PreferencePair>& data, const TrainConfig& cfg,
                        std::vector<double>* loss_log = nullptr);

// Central finite differences (step 1e-5) against the analytic gradient;
// returns max over checked coordinates of |g_fd - g| / max(1e-8, |g_fd|+|g|).
// Sweeps every coordinate up to 5000 parameters, a seeded subsample beyond.
double grad_check(LossKind kind, const LanguageModel& model, std::span<const SftExample> sft_batch,
                  std::span<const PreferencePair> dpo_batch, const LanguageModel* reference,
                  double beta = 0.1, uint64_t subsample_seed = 0);

// Best-of-n pair construction: n temperature-sampled candidates per prompt,
// highest oracle score chosen, lowest rejected, ties to the earliest sample.
// Pairs whose two responses coincide are dropped.
using OracleFn = std::function<double(const Sequence& response)>;
std::vector<PreferencePair> build_preference_pairs(const LanguageModel& model,
                                                   const std::vector<Sequence>& prompts,
                                                   const OracleFn& oracle, int n_candidates,
                                                   const DecodeConfig& cfg);

}  // namespace tinyalign
