// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tinyalign/checkpoint.hpp"
#include "tinyalign/corpus.hpp"
#include "tinyalign/decode.hpp"
#include "tinyalign/eval.hpp"
#include "tinyalign/io.hpp"
#include "tinyalign/oracle.hpp"
#include "tinyalign/pipeline.hpp"
#include "tinyalign/reward.hpp"
#include "tinyalign/testgen.hpp"
#include "tinyalign/train.hpp"
#include "tinyalign/util.hpp"

using namespace tinyalign;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Timer {
    Clock::time_point start = Clock::now();
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

std::vector<double> unit_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

// ---------------------------------------------------------------------------
// Desk-scale artifacts shared by criteria 4, 7, 8, 9, 10.

struct SeedRun {
    uint64_t seed = 0;
    fs::path dir;
    PipelineConfig config;
    RunManifest manifest;
    LanguageModel weak_ref;
    LanguageModel weak_aligned;
    double pipeline_seconds = 0.0;
};

SeedRun run_seed(uint64_t seed, const fs::path& root) {
    SeedRun run;
    run.seed = seed;
    run.dir = root / ("seed_" + std::to_string(seed));
    fs::create_directories(run.dir);

    std::vector<std::string> lines = make_corpus(seed, 1200);
    std::string joined;
    for (const std::string& l : lines) joined += l;
    Vocab vocab = build_vocab(joined);
    std::vector<SftExample> data;
    for (const std::string& l : lines) data.push_back({{}, to_response(vocab, l)});

    TrainConfig base_cfg;
    base_cfg.learning_rate = 0.05;
    base_cfg.epochs = 30;
    base_cfg.batch_size = 16;

    base_cfg.seed = derive_seed(seed, 21);
    LanguageModel weak = LanguageModel::make_neural(
        vocab, NeuralParams::random_init(vocab.size(), 4, 16, 32, 0.08, derive_seed(seed, 22)));
    weak = train_sft(std::move(weak), data, base_cfg);
    save_checkpoint(weak, (run.dir / "weak_ref.ckpt").string());

    base_cfg.seed = derive_seed(seed, 23);
    LanguageModel strong = LanguageModel::make_neural(
        vocab, NeuralParams::random_init(vocab.size(), 8, 32, 128, 0.08, derive_seed(seed, 24)));
    strong = train_sft(std::move(strong), data, base_cfg);
    save_checkpoint(strong, (run.dir / "strong_ref.ckpt").string());

    write_lines((run.dir / "train_prompts.txt").string(), make_prompts(derive_seed(seed, 25), 1000));
    write_lines((run.dir / "eval_prompts.txt").string(), make_prompts(derive_seed(seed, 26), 300));

    run.config = PipelineConfig::with_defaults();
    run.config.seed = seed;
    run.config.output_dir = (run.dir / "run").string();
    run.config.weak_ref = (run.dir / "weak_ref.ckpt").string();
    run.config.strong_ref = (run.dir / "strong_ref.ckpt").string();
    run.config.prompts = (run.dir / "train_prompts.txt").string();
    run.config.eval_prompts = (run.dir / "eval_prompts.txt").string();

    Timer t;
    run.manifest = run_full_pipeline(run.config);
    run.pipeline_seconds = t.elapsed();

    run.weak_ref = std::move(weak);
    run.weak_aligned =
        load_checkpoint((fs::path(run.config.output_dir) / "weak_aligned.ckpt").string());
    return run;
}

// ---------------------------------------------------------------------------
// Criteria 1-3, 5, 6: property checks on small random instances.

void criterion_1() {
    Timer t;
    std::vector<double> grid = unit_grid();
    double worst = 0.0;
    for (uint64_t i = 0; i < 200; ++i) {
        ModelPair pair = random_model_pair(derive_seed(11, i));
        Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(12, i));
        worst = std::max(worst, tilting_identity_max_error(pair.pi_r, pair.pi_ref, ctx, grid));
    }
    std::ostringstream d;
    d << "200 instances, max |dlogZ/deta - E[rhat]| = " << worst << " < 1e-6";
    report(1, "tilting identity", worst < 1e-6 && t.elapsed() < 10.0, d.str(), t.elapsed());
}

void criterion_2() {
    Timer t;
    std::vector<double> grid = unit_grid();
    double worst_second = 0.0, worst_monotone = 0.0;
    for (uint64_t i = 0; i < 100; ++i) {
        ModelPair pair = random_model_pair(derive_seed(21, i));
        Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(22, i));
        TiltingReport rep = tilting_report(pair.pi_r, pair.pi_ref, ctx, grid);
        for (size_t g = 1; g + 1 < grid.size(); ++g) {
            double second =
                rep.log_partition[g + 1] - 2.0 * rep.log_partition[g] + rep.log_partition[g - 1];
            worst_second = std::max(worst_second, -second);
        }
        // E non-increasing in alpha means non-decreasing along eta
        for (size_t g = 1; g < grid.size(); ++g)
            worst_monotone = std::max(worst_monotone, rep.expectation[g - 1] - rep.expectation[g]);
    }
    bool pass = worst_second <= 1e-9 && worst_monotone <= 1e-9;
    std::ostringstream d;
    d << "100 instances, worst -d2logZ = " << worst_second
      << ", worst E-decrease = " << worst_monotone;
    report(2, "log-partition convexity and reward monotonicity", pass && t.elapsed() < 10.0, d.str(),
           t.elapsed());
}

void criterion_3() {
    Timer t;
    double worst_equiv = 0.0, worst_reduction = 0.0, worst_corrected = 0.0;
    for (uint64_t i = 0; i < 100; ++i) {
        ModelPair pair = random_model_pair(derive_seed(31, i));
        Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(32, i));
        DecodeConfig cfg;
        cfg.lambda = 0.0;
        cfg.repetition_penalty = 1.0;
        cfg.alpha = static_cast<double>(i % 11) / 10.0;
        std::vector<double> cd = cd_next_token_distribution(pair.pi_r, pair.pi_ref, ctx, {}, cfg);
        std::vector<double> tilt = tilted_distribution(pair.pi_r, pair.pi_ref, ctx, 1.0 - cfg.alpha);
        for (size_t v = 0; v < cd.size(); ++v)
            worst_equiv = std::max(worst_equiv, std::abs(cd[v] - tilt[v]));

        // the identity that does hold: cd is the tilting of pi_r by the
        // statistic -log pi_ref at eta = 1 - alpha
        std::vector<double> lr = logprobs(pair.pi_r, ctx);
        std::vector<double> lref = logprobs(pair.pi_ref, ctx);
        std::vector<double> scores(lr.size());
        for (size_t v = 0; v < lr.size(); ++v) scores[v] = lr[v] - (1.0 - cfg.alpha) * lref[v];
        double lse = logsumexp(scores);
        for (size_t v = 0; v < cd.size(); ++v)
            worst_corrected = std::max(worst_corrected, std::abs(cd[v] - std::exp(scores[v] - lse)));

        cfg.alpha = 1.0;
        std::vector<double> cd1 = cd_next_token_distribution(pair.pi_r, pair.pi_ref, ctx, {}, cfg);
        std::vector<double> lp = logprobs(pair.pi_r, ctx);
        for (size_t v = 0; v < cd1.size(); ++v)
            worst_reduction = std::max(worst_reduction, std::abs(cd1[v] - std::exp(lp[v])));
    }
    bool pass = worst_equiv <= 1e-12 && worst_reduction <= 1e-12;
    std::ostringstream d;
    d << "max |cd - ratio-tilt| = " << worst_equiv << " (bound 1e-12), max |cd(alpha=1) - pi_r| = "
      << worst_reduction
      << "; the contrastive scores normalize to pi_r^alpha * exp(eta*rhat), not"
         " pi_r * exp(eta*rhat), so the families coincide only at alpha = 1;"
         " tilting pi_r by -log pi_ref instead reproduces cd to "
      << worst_corrected;
    report(3, "cd-tilting equivalence and reduction", pass && t.elapsed() < 5.0, d.str(), t.elapsed());
}

void criterion_5() {
    Timer t;
    Vocab vocab = toy_vocab(3);
    double worst_sft = 0.0, worst_dpo = 0.0, worst_anchor = 0.0;
    for (uint64_t i = 0; i < 20; ++i) {
        LanguageModel model = random_neural_model(vocab, 2, 3, 4, derive_seed(41, i));
        std::vector<SftExample> batch;
        for (uint64_t b = 0; b < 3; ++b) {
            Sequence prompt = random_context(vocab, derive_seed(42, i * 8 + b), 3);
            Sequence resp = random_context(vocab, derive_seed(43, i * 8 + b), 4);
            if (resp.empty()) resp.push_back(Vocab::kEos);
            batch.push_back({prompt, resp});
        }
        worst_sft = std::max(worst_sft, grad_check(LossKind::sft, model, batch, {}, nullptr));
    }
    for (uint64_t i = 0; i < 20; ++i) {
        LanguageModel policy = random_neural_model(vocab, 2, 3, 4, derive_seed(51, i));
        LanguageModel reference = random_neural_model(vocab, 2, 3, 4, derive_seed(52, i));
        std::vector<PreferencePair> batch;
        for (uint64_t b = 0; b < 3; ++b) {
            Sequence prompt = random_context(vocab, derive_seed(53, i * 8 + b), 3);
            Sequence yw = random_context(vocab, derive_seed(54, i * 8 + b), 4);
            Sequence yl = random_context(vocab, derive_seed(55, i * 8 + b), 4);
            if (yw.empty()) yw.push_back(Vocab::kEos);
            if (yl.empty()) yl.push_back(static_cast<TokenId>(2));
            batch.push_back({prompt, yw, yl});
        }
        worst_dpo = std::max(worst_dpo, grad_check(LossKind::dpo, policy, {}, batch, &reference, 0.3));
        worst_anchor =
            std::max(worst_anchor, std::abs(dpo_loss(policy, policy, batch, 0.3) - std::log(2.0)));
    }
    bool pass = worst_sft < 1e-4 && worst_dpo < 1e-4 && worst_anchor <= 1e-9;
    std::ostringstream d;
    d << "20+20 instances, max rel err sft = " << worst_sft << ", dpo = " << worst_dpo
      << ", ln2 anchor err = " << worst_anchor;
    report(5, "gradient correctness", pass && t.elapsed() < 30.0, d.str(), t.elapsed());
}

void criterion_6() {
    Timer t;
    DecodeConfig cfg;
    cfg.alpha = 0.4;
    cfg.lambda = 0.1;
    cfg.repetition_penalty = 1.2;
    cfg.max_len = 3;
    PolicySpec policy = PolicySpec::contrastive(cfg.alpha, cfg.lambda, cfg.repetition_penalty);

    int path_mismatches = 0;
    double worst_dist = 0.0;
    for (uint64_t i = 0; i < 50; ++i) {
        ModelPair pair = random_model_pair(derive_seed(61, i));
        Sequence prompt = random_context(pair.pi_r.vocab, derive_seed(62, i), 3);

        Sequence got = cd_generate(pair.pi_r, pair.pi_ref, prompt, cfg);
        Sequence want;
        Sequence ctx = prompt;
        for (int step = 0; step < cfg.max_len; ++step) {
            std::vector<double> oracle_q =
                enumeration_step_distribution(pair.pi_r, pair.pi_ref, ctx, want, policy);
            std::vector<double> impl_q =
                cd_next_token_distribution(pair.pi_r, pair.pi_ref, ctx, want, cfg);
            for (size_t v = 0; v < oracle_q.size(); ++v)
                worst_dist = std::max(worst_dist, std::abs(oracle_q[v] - impl_q[v]));
            TokenId next = argmax_lowest_id(oracle_q);
            want.push_back(next);
            ctx.push_back(next);
            if (next == Vocab::kEos) break;
        }
        if (got != want) ++path_mismatches;
    }

    int dominance_holds = 0;
    double worst_gap = 0.0;
    for (uint64_t i = 0; i < 50; ++i) {
        ModelPair pair = random_model_pair(derive_seed(63, i));
        Sequence prompt = random_context(pair.pi_r.vocab, derive_seed(64, i), 2);
        double e_cd = enumerate_expected_reward(pair.pi_r, pair.pi_ref, prompt,
                                                PolicySpec::contrastive(0.3), 3);
        double e_std =
            enumerate_expected_reward(pair.pi_r, pair.pi_ref, prompt, PolicySpec::standard(), 3);
        if (e_cd >= e_std - 1e-12)
            ++dominance_holds;
        else
            worst_gap = std::max(worst_gap, e_std - e_cd);
    }

    bool pass = path_mismatches == 0 && worst_dist == 0.0 && dominance_holds == 50;
    std::ostringstream d;
    d << "greedy path mismatches = " << path_mismatches << "/50, max |dist - oracle| = "
      << worst_dist << " (exact), E_cd(0.3) >= E_std on " << dominance_holds << "/50";
    if (dominance_holds < 50)
        d << " (worst violation " << worst_gap
          << "; exact dominance is a theorem for the ratio-tilted family only)";
    report(6, "enumeration-oracle agreement", pass && t.elapsed() < 60.0, d.str(), t.elapsed());
}

// ---------------------------------------------------------------------------
// Criteria 4, 7, 8, 9, 10: desk-scale pipeline runs.

void criterion_4(const std::vector<SeedRun>& runs) {
    Timer t;
    bool pass = true;
    std::ostringstream d;
    for (const SeedRun& run : runs) {
        std::vector<Sequence> prompts =
            encode_prompts(run.weak_ref.vocab, make_prompts(derive_seed(run.seed, 27), 500));
        DecodeConfig cd_cfg = run.config.decode;
        DecodeConfig greedy;
        greedy.mode = DecodeMode::greedy;
        greedy.max_len = cd_cfg.max_len;
        double mean_cd = 0.0, mean_std = 0.0;
        for (const Sequence& p : prompts) {
            Sequence y_cd = cd_generate(run.weak_aligned, run.weak_ref, p, cd_cfg);
            Sequence y_std = sample_standard(run.weak_aligned, p, greedy);
            mean_cd += sequence_implicit_reward(run.weak_aligned, run.weak_ref, p, y_cd, 1.0) / 500.0;
            mean_std +=
                sequence_implicit_reward(run.weak_aligned, run.weak_ref, p, y_std, 1.0) / 500.0;
        }
        pass = pass && mean_cd > mean_std;
        d << "seed " << run.seed << ": " << mean_cd << " vs " << mean_std << "; ";
    }
    d << "cd(0.4) vs standard greedy over 500 prompts";
    report(4, "sequence-level reward gap of contrastive generations", pass && t.elapsed() < 120.0,
           d.str(), t.elapsed());
}

void criterion_7(const std::vector<SeedRun>& runs) {
    Timer t;
    bool win_ok = true, gap_ok = true, runtime_ok = true;
    int first_ordering = 0, second_ordering = 0;
    std::ostringstream d;
    for (const SeedRun& run : runs) {
        const ComparisonTable& table = run.manifest.comparison;
        double win = table.row("cd_dpo").win_rate_vs_baseline;
        double cong = table.row("cd_dpo").mean_oracle;
        double cong_s = table.row("cd_sft").mean_oracle;
        double weak_sft = table.row("weak_sft").mean_oracle;
        win_ok = win_ok && win >= 0.55;
        if (cong >= cong_s) ++first_ordering;
        if (cong_s >= weak_sft) ++second_ordering;
        gap_ok = gap_ok && run.manifest.reward_gap_mean > 0.0;
        runtime_ok = runtime_ok && run.pipeline_seconds < 600.0;
        d << "seed " << run.seed << ": win " << win << ", oracle " << cong << "/" << cong_s << "/"
          << weak_sft << ", gap " << run.manifest.reward_gap_mean << ", " << run.pipeline_seconds
          << "s; ";
    }
    bool pass = win_ok && first_ordering == 3 && second_ordering >= 2 && gap_ok && runtime_ok;
    d << "orderings " << first_ordering << "/3 and " << second_ordering << "/3";
    report(7, "pipeline ordering", pass, d.str(), t.elapsed());
}

void criterion_8(const std::vector<SeedRun>& runs) {
    Timer t;
    bool pass = true;
    OracleSpec spec = OracleSpec::defaults();
    std::ostringstream d;
    for (const SeedRun& run : runs) {
        std::vector<Sequence> prompts =
            encode_prompts(run.weak_ref.vocab, make_prompts(derive_seed(run.seed, 28), 500));
        std::vector<RewardRecord> records;
        DecodeConfig samp;
        samp.mode = DecodeMode::sample;
        samp.max_len = run.config.decode.max_len;
        for (size_t i = 0; i < prompts.size(); ++i) {
            samp.seed = derive_seed(run.seed, 29, i);
            Sequence y = sample_standard(run.weak_aligned, prompts[i], samp);
            records.push_back(
                {sequence_implicit_reward(run.weak_aligned, run.weak_ref, prompts[i], y, 1.0),
                 oracle_score(spec, run.weak_ref.vocab, y),
                 static_cast<int>(run.weak_ref.vocab.decode(y).size())});
        }
        double r = reward_correlation(records);
        pass = pass && r > 0.0;
        d << "seed " << run.seed << ": r = " << r << (r > 0.2 ? " (soft target met)" : "") << "; ";
    }
    report(8, "implicit-explicit reward correlation", pass, d.str(), t.elapsed());
}

void criterion_9(const std::vector<SeedRun>& runs) {
    Timer t;
    bool pass = true;
    OracleSpec spec = OracleSpec::defaults();
    std::ostringstream d;
    for (const SeedRun& run : runs) {
        std::vector<Sequence> prompts =
            encode_prompts(run.weak_ref.vocab, make_prompts(derive_seed(run.seed, 30), 300));
        DecodeConfig cfg = run.config.decode;
        AlphaSweepReport rep =
            alpha_sweep(run.weak_aligned, run.weak_ref, prompts, unit_grid(), spec, cfg);
        double block = 0.0;
        int count = 0;
        for (size_t i = 0; i <= 5; ++i) {
            for (size_t j = 6; j <= 10; ++j) {
                block += rep.win_rates.entries[i][j];
                ++count;
            }
        }
        block /= static_cast<double>(count);
        pass = pass && block > 0.5;
        d << "seed " << run.seed << ": low-alpha block win rate " << block << "; ";
    }
    report(9, "alpha-block win rates", pass, d.str(), t.elapsed());
}

void criterion_10(const SeedRun& run, const fs::path& root) {
    Timer t;
    // stash the first run's bytes, rerun the identical config into the same
    // directory, and compare byte for byte
    const char* artifacts[] = {"manifest.json", "weak_aligned.ckpt", "strong_sft.ckpt",
                               "strong_final.ckpt", "weak_sft.ckpt", "d_sft.jsonl", "d_dpo.jsonl"};
    fs::path run_dir(run.config.output_dir);
    std::map<std::string, std::string> before;
    for (const char* name : artifacts) before[name] = read_text_file((run_dir / name).string());

    fs::path stash = root / "determinism_stash";
    fs::create_directories(stash);
    for (const char* name : artifacts)
        fs::copy_file(run_dir / name, stash / name, fs::copy_options::overwrite_existing);

    run_full_pipeline(run.config);

    int mismatches = 0;
    for (const char* name : artifacts)
        if (before[name] != read_text_file((run_dir / name).string())) ++mismatches;
    std::ostringstream d;
    d << "rerun of seed " << run.seed << ": " << mismatches << " artifact mismatches across "
      << std::size(artifacts) << " files";
    report(10, "pipeline determinism", mismatches == 0, d.str(), t.elapsed());
}

}  // namespace

int main() {
    Timer total;
    fs::path root = fs::temp_directory_path() / "tinyalign_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_5();
    criterion_6();

    std::vector<SeedRun> runs;
    for (uint64_t seed : {1ull, 2ull, 3ull}) runs.push_back(run_seed(seed, root));

    criterion_4(runs);
    criterion_7(runs);
    criterion_8(runs);
    criterion_9(runs);
    criterion_10(runs[0], root);

    std::printf("%d of 10 criteria passed in %.0fs\n", 10 - g_failures, total.elapsed());
    return g_failures == 0 ? 0 : 1;
}
