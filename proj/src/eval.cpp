#include "tinyalign/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tinyalign {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string WinRateMatrix::to_csv() const {
    std::ostringstream os;
    os << "condition";
    for (const std::string& l : labels) os << "," << l;
    os << "\n";
    for (size_t i = 0; i < labels.size(); ++i) {
        os << labels[i];
        for (size_t j = 0; j < labels.size(); ++j) os << "," << fmt(entries[i][j]);
        os << "\n";
    }
    return os.str();
}

WinRateMatrix win_rate_matrix(const std::vector<std::string>& labels,
                              const std::vector<std::vector<double>>& scores_per_condition) {
    if (labels.size() != scores_per_condition.size())
        throw std::invalid_argument("labels and score lists disagree");
    const size_t n = labels.size();
    size_t prompts = n == 0 ? 0 : scores_per_condition[0].size();
    for (const auto& s : scores_per_condition)
        if (s.size() != prompts) throw std::invalid_argument("misaligned prompt lists");
    if (prompts == 0) throw std::invalid_argument("misaligned prompt lists");

    WinRateMatrix m;
    m.labels = labels;
    m.entries.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double wins = 0.0;
            for (size_t p = 0; p < prompts; ++p) {
                double a = scores_per_condition[i][p], b = scores_per_condition[j][p];
                wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
            }
            m.entries[i][j] = wins / static_cast<double>(prompts);
        }
    }
    return m;
}

WinRateMatrix win_rate_matrix(const std::vector<std::string>& labels,
                              const std::vector<std::vector<Sequence>>& generations, const Vocab& vocab,
                              const OracleSpec& spec) {
    std::vector<std::vector<double>> scores(generations.size());
    for (size_t i = 0; i < generations.size(); ++i) {
        scores[i].reserve(generations[i].size());
        for (const Sequence& g : generations[i]) scores[i].push_back(oracle_score(spec, vocab, g));
    }
    return win_rate_matrix(labels, scores);
}

double reward_correlation(const std::vector<RewardRecord>& records) {
    if (records.size() < 3) throw std::invalid_argument("need at least three records");
    double mx = 0.0, my = 0.0;
    for (const RewardRecord& r : records) {
        mx += r.implicit;
        my += r.explicit_reward;
    }
    mx /= static_cast<double>(records.size());
    my /= static_cast<double>(records.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const RewardRecord& r : records) {
        double dx = r.implicit - mx, dy = r.explicit_reward - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("degenerate sample");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

AlphaSweepRow summarize(double alpha, const std::vector<Sequence>& prompts,
                        const std::vector<Sequence>& gens, const LanguageModel& pi_r,
                        const LanguageModel& pi_ref, const OracleSpec& spec) {
    AlphaSweepRow row;
    row.alpha = alpha;
    const double n = static_cast<double>(prompts.size());
    for (size_t p = 0; p < prompts.size(); ++p) {
        row.mean_implicit += sequence_implicit_reward(pi_r, pi_ref, prompts[p], gens[p], 1.0) / n;
        row.mean_explicit += oracle_score(spec, pi_r.vocab, gens[p]) / n;
        row.length_mean += static_cast<double>(pi_r.vocab.decode(gens[p]).size()) / n;
    }
    for (size_t p = 0; p < prompts.size(); ++p) {
        double d = static_cast<double>(pi_r.vocab.decode(gens[p]).size()) - row.length_mean;
        row.length_std += d * d / n;
    }
    row.length_std = std::sqrt(row.length_std);
    return row;
}

}  // namespace

AlphaSweepReport alpha_sweep(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const std::vector<Sequence>& prompts, const std::vector<double>& alpha_grid,
                             const OracleSpec& spec, const DecodeConfig& cfg) {
    if (alpha_grid.empty()) throw std::invalid_argument("empty alpha grid");
    require_same_vocab(pi_r, pi_ref);
    spec.validate();

    AlphaSweepReport report;
    std::vector<std::string> labels;
    for (double alpha : alpha_grid) {
        DecodeConfig acfg = cfg;
        acfg.alpha = alpha;
        acfg.mode = DecodeMode::greedy;
        std::vector<Sequence> gens;
        gens.reserve(prompts.size());
        for (const Sequence& prompt : prompts) gens.push_back(cd_generate(pi_r, pi_ref, prompt, acfg));
        report.rows.push_back(summarize(alpha, prompts, gens, pi_r, pi_ref, spec));
        report.generations.push_back(std::move(gens));

        std::ostringstream label;
        label << "alpha=" << alpha;
        labels.push_back(label.str());
    }

    // Sample-free greedy decoding of pi_r, the standard-decoding comparator.
    {
        DecodeConfig scfg = cfg;
        scfg.mode = DecodeMode::greedy;
        std::vector<Sequence> gens;
        gens.reserve(prompts.size());
        for (const Sequence& prompt : prompts) gens.push_back(sample_standard(pi_r, prompt, scfg));
        report.standard_row = summarize(1.0, prompts, gens, pi_r, pi_ref, spec);
    }

    report.win_rates = win_rate_matrix(labels, report.generations, pi_r.vocab, spec);
    return report;
}

std::string AlphaSweepReport::rows_to_csv() const {
    std::ostringstream os;
    os << "alpha,mean_implicit,mean_explicit,length_mean,length_std\n";
    for (const AlphaSweepRow& r : rows)
        os << fmt(r.alpha) << "," << fmt(r.mean_implicit) << "," << fmt(r.mean_explicit) << ","
           << fmt(r.length_mean) << "," << fmt(r.length_std) << "\n";
    os << "standard," << fmt(standard_row.mean_implicit) << "," << fmt(standard_row.mean_explicit)
       << "," << fmt(standard_row.length_mean) << "," << fmt(standard_row.length_std) << "\n";
    return os.str();
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream os;
    os << "name,seed,mean_oracle,win_rate_vs_baseline,mean_implicit_vs_weak\n";
    for (const ComparisonRow& r : rows)
        os << r.name << "," << r.seed << "," << fmt(r.mean_oracle) << ","
           << fmt(r.win_rate_vs_baseline) << "," << fmt(r.mean_implicit_vs_weak) << "\n";
    return os.str();
}

const ComparisonRow& ComparisonTable::row(const std::string& name) const {
    for (const ComparisonRow& r : rows)
        if (r.name == name) return r;
    throw std::out_of_range("no comparison row named " + name);
}

ComparisonTable compare_methods(const std::vector<std::pair<std::string, const LanguageModel*>>& models,
                                const std::string& baseline, const std::vector<Sequence>& eval_prompts,
                                const OracleSpec& spec, const LanguageModel* weak_r,
                                const LanguageModel* weak_ref, uint64_t seed, int max_len) {
    if (models.size() < 2) throw std::invalid_argument("need at least two models");
    int baseline_idx = -1;
    for (size_t i = 0; i < models.size(); ++i)
        if (models[i].first == baseline) baseline_idx = static_cast<int>(i);
    if (baseline_idx < 0) throw std::invalid_argument("missing baseline");
    for (size_t i = 1; i < models.size(); ++i)
        require_same_vocab(*models[0].second, *models[i].second);
    spec.validate();

    DecodeConfig cfg;
    cfg.mode = DecodeMode::greedy;
    cfg.max_len = max_len;

    std::vector<std::vector<Sequence>> gens(models.size());
    std::vector<std::vector<double>> scores(models.size());
    for (size_t i = 0; i < models.size(); ++i) {
        gens[i].reserve(eval_prompts.size());
        for (const Sequence& prompt : eval_prompts)
            gens[i].push_back(sample_standard(*models[i].second, prompt, cfg));
        for (const Sequence& g : gens[i])
            scores[i].push_back(oracle_score(spec, models[i].second->vocab, g));
    }

    ComparisonTable table;
    const double n = static_cast<double>(eval_prompts.size());
    for (size_t i = 0; i < models.size(); ++i) {
        ComparisonRow row;
        row.name = models[i].first;
        row.seed = seed;
        for (double s : scores[i]) row.mean_oracle += s / n;
        double wins = 0.0;
        for (size_t p = 0; p < eval_prompts.size(); ++p) {
            double a = scores[i][p], b = scores[static_cast<size_t>(baseline_idx)][p];
            wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
        }
        row.win_rate_vs_baseline = wins / n;
        if (weak_r && weak_ref) {
            for (size_t p = 0; p < eval_prompts.size(); ++p)
                row.mean_implicit_vs_weak +=
                    sequence_implicit_reward(*weak_r, *weak_ref, eval_prompts[p], gens[i][p], 1.0) / n;
        }
        table.rows.push_back(row);
    }
    return table;
}

std::string tilting_report_to_csv(const TiltingReport& report) {
    std::ostringstream os;
    os << "eta,log_partition,expectation,variance\n";
    for (size_t i = 0; i < report.eta_grid.size(); ++i)
        os << fmt(report.eta_grid[i]) << "," << fmt(report.log_partition[i]) << ","
           << fmt(report.expectation[i]) << "," << fmt(report.variance[i]) << "\n";
    return os.str();
}

}  // namespace tinyalign
