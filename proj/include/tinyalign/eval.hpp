#pragma once

#include <string>
#include <vector>

#include "tinyalign/decode.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/oracle.hpp"
#include "tinyalign/reward.hpp"

namespace tinyalign {

// Pairwise win rates between named conditions; ties count 0.5, so the
// diagonal is exactly 0.5 and entries[i][j] + entries[j][i] == 1.
struct WinRateMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> entries;

    std::string to_csv() const;
};

// One response list per condition, aligned by prompt.
WinRateMatrix win_rate_matrix(const std::vector<std::string>& labels,
                              const std::vector<std::vector<double>>& scores_per_condition);
WinRateMatrix win_rate_matrix(const std::vector<std::string>& labels,
                              const std::vector<std::vector<Sequence>>& generations, const Vocab& vocab,
                              const OracleSpec& spec);

// Pearson correlation between implicit and explicit rewards.
double reward_correlation(const std::vector<RewardRecord>& records);

struct AlphaSweepRow {
    double alpha = 0.0;
    double mean_implicit = 0.0;
    double mean_explicit = 0.0;
    double length_mean = 0.0;
    double length_std = 0.0;
};

struct AlphaSweepReport {
    std::vector<AlphaSweepRow> rows;
    AlphaSweepRow standard_row;  // sample-free greedy decoding of pi_r
    WinRateMatrix win_rates;     // across alpha conditions
    std::vector<std::vector<Sequence>> generations;  // one list per alpha, aligned by prompt

    std::string rows_to_csv() const;
};

// Greedy contrastive generations for each alpha in the grid plus the plain
// greedy baseline; per-alpha implicit/explicit reward and length statistics.
AlphaSweepReport alpha_sweep(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const std::vector<Sequence>& prompts, const std::vector<double>& alpha_grid,
                             const OracleSpec& spec, const DecodeConfig& cfg);

struct ComparisonRow {
    std::string name;
    uint64_t seed = 0;
    double mean_oracle = 0.0;
    double win_rate_vs_baseline = 0.5;
    double mean_implicit_vs_weak = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;

    std::string to_csv() const;
    const ComparisonRow& row(const std::string& name) const;
};

// Greedy generations per model on the shared prompt list; oracle means, win
// rate against the designated baseline, and implicit reward measured against
// the weak (aligned, reference) pair when one is supplied.
ComparisonTable compare_methods(const std::vector<std::pair<std::string, const LanguageModel*>>& models,
                                const std::string& baseline, const std::vector<Sequence>& eval_prompts,
                                const OracleSpec& spec, const LanguageModel* weak_r,
                                const LanguageModel* weak_ref, uint64_t seed, int max_len);

std::string tilting_report_to_csv(const TiltingReport& report);

}  // namespace tinyalign
