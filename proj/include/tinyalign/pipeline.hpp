#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tinyalign/decode.hpp"
#include "tinyalign/eval.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/oracle.hpp"
#include "tinyalign/train.hpp"

namespace tinyalign {

struct PipelineConfig {
    uint64_t seed = 1;
    std::string output_dir;
    std::string weak_ref;       // checkpoint path
    std::string weak_aligned;   // optional; empty means produce it via DPO
    std::string strong_ref;     // checkpoint path; equals weak_ref in self-alignment
    std::string prompts;        // training prompts, one per line
    std::string eval_prompts;   // held-out prompts, one per line
    bool self_alignment = false;

    DecodeConfig decode;       // stage 1 contrastive generation
    TrainConfig align_train;   // weak DPO
    TrainConfig stage1_train;  // strong SFT
    TrainConfig stage2_train;  // strong DPO (carries beta)

    int n_candidates = 5;         // best-of-n for weak alignment pairs
    double yl_temperature = 1.0;  // stage 2 standard-decoding temperature
    int yl_per_prompt = 1;        // rejected samples drawn per prompt
    OracleSpec oracle = OracleSpec::defaults();

    static PipelineConfig with_defaults();
    static PipelineConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    void validate() const;
};

struct AlignResult {
    LanguageModel model;
    std::vector<PreferencePair> pairs;
    std::vector<double> loss_log;
};

// DPO-align a reference model against itself using best-of-n oracle-scored
// pairs; the contrastive pair's "post-alignment" side.
AlignResult align_weak(const LanguageModel& weak_ref, const std::vector<Sequence>& prompts,
                       const OracleSpec& oracle, const DecodeConfig& sample_cfg, int n_candidates,
                       const TrainConfig& cfg);

struct Stage1Result {
    LanguageModel strong_sft;
    std::vector<SftExample> d_sft;  // one (prompt, y_w) per surviving prompt
    std::vector<size_t> prompt_index;  // original index per d_sft entry
    int n_dropped = 0;
    double mean_implicit_cd = 0.0;  // weak-pair implicit reward of y_w
    std::vector<double> loss_log;
};

// Stage 1: contrastive generations from the weak pair become the SFT corpus
// for the strong model. Text-empty generations are dropped with a warning;
// more than 10% drops aborts.
Stage1Result stage1_cd_sft(const LanguageModel& weak_r, const LanguageModel& weak_ref,
                           const LanguageModel& strong_ref, const std::vector<Sequence>& prompts,
                           const DecodeConfig& decode_cfg, const TrainConfig& train_cfg);

struct Stage2Result {
    LanguageModel strong_final;
    std::vector<PreferencePair> d_dpo;
    int n_dropped = 0;
    double reward_gap_mean = 0.0;  // mean weak-pair rhat(y_w) - rhat(y_l)
    std::vector<double> loss_log;  // entry 0 is the pre-update loss
};

// Stage 2: pair each y_w with a standard-decoded sample from the stage-1
// model, then DPO with the stage-1 model as the frozen reference.
Stage2Result stage2_cd_dpo(const LanguageModel& strong_sft, const std::vector<SftExample>& d_sft,
                           const LanguageModel& weak_r, const LanguageModel& weak_ref,
                           const TrainConfig& train_cfg, double yl_temperature, int yl_per_prompt,
                           int max_len, uint64_t seed);

struct BaselineResult {
    LanguageModel model;
    std::vector<SftExample> data;
    int n_dropped = 0;
    std::vector<double> loss_log;
};

// Direct SFT of the strong model on greedy standard-decoded outputs of the
// aligned weak model; the comparison baseline.
BaselineResult weak_sft_baseline(const LanguageModel& weak_r, const LanguageModel& strong_ref,
                                 const std::vector<Sequence>& prompts, const TrainConfig& train_cfg,
                                 int max_len);

struct RunManifest {
    std::string json_text;   // canonical manifest document
    std::string config_hash;
    ComparisonTable comparison;
    WinRateMatrix eval_win_rates;
    double reward_gap_mean = 0.0;
    double dpo_initial_loss = 0.0;
};

// Full two-stage run: (align ->) stage 1 -> stage 2 -> baseline -> eval.
// Writes checkpoints, datasets, reports, and manifest.json under
// config.output_dir; returns the manifest. Deterministic given the config.
RunManifest run_full_pipeline(const PipelineConfig& config);

}  // namespace tinyalign
