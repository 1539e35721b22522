#include "tinyalign/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tinyalign/checkpoint.hpp"
#include "tinyalign/corpus.hpp"
#include "tinyalign/io.hpp"
#include "tinyalign/reward.hpp"
#include "tinyalign/util.hpp"

namespace tinyalign {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json decode_to_json(const DecodeConfig& c) {
    return json{{"alpha", c.alpha},
                {"lambda", c.lambda},
                {"repetition_penalty", c.repetition_penalty},
                {"max_len", c.max_len},
                {"temperature", c.temperature},
                {"mode", c.mode == DecodeMode::greedy ? "greedy" : "sample"},
                {"seed", c.seed}};
}

DecodeConfig decode_from_json(const json& j) {
    DecodeConfig c;
    c.alpha = j.value("alpha", c.alpha);
    c.lambda = j.value("lambda", c.lambda);
    c.repetition_penalty = j.value("repetition_penalty", c.repetition_penalty);
    c.max_len = j.value("max_len", c.max_len);
    c.temperature = j.value("temperature", c.temperature);
    std::string mode = j.value("mode", std::string("greedy"));
    if (mode != "greedy" && mode != "sample") throw std::invalid_argument("unknown decode mode: " + mode);
    c.mode = mode == "greedy" ? DecodeMode::greedy : DecodeMode::sample;
    c.seed = j.value("seed", c.seed);
    return c;
}

json train_to_json(const TrainConfig& c) {
    return json{{"beta", c.beta},
                {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed}};
}

TrainConfig train_from_json(const json& j, const TrainConfig& defaults) {
    TrainConfig c = defaults;
    c.beta = j.value("beta", c.beta);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    return c;
}

json oracle_to_json(const OracleSpec& s) {
    std::vector<std::string> bad;
    for (char c : s.bad_chars) bad.emplace_back(1, c);
    return json{{"good_bigrams", std::vector<std::string>(s.good_bigrams.begin(), s.good_bigrams.end())},
                {"bad_chars", bad},
                {"min_len", s.min_len},
                {"max_len", s.max_len}};
}

OracleSpec oracle_from_json(const json& j) {
    OracleSpec s = OracleSpec::defaults();
    if (j.contains("good_bigrams")) {
        s.good_bigrams.clear();
        for (const auto& bg : j.at("good_bigrams")) s.good_bigrams.insert(bg.get<std::string>());
    }
    if (j.contains("bad_chars")) {
        s.bad_chars.clear();
        for (const auto& bc : j.at("bad_chars")) {
            std::string c = bc.get<std::string>();
            if (c.size() != 1) throw std::invalid_argument("bad_chars entries must be single characters");
            s.bad_chars.insert(c[0]);
        }
    }
    s.min_len = j.value("min_len", s.min_len);
    s.max_len = j.value("max_len", s.max_len);
    return s;
}

bool text_empty(const Vocab& vocab, const Sequence& response) {
    return vocab.decode(response).empty();
}

}  // namespace

PipelineConfig PipelineConfig::with_defaults() {
    PipelineConfig c;
    c.decode.alpha = 0.4;
    c.decode.lambda = 0.1;
    c.decode.repetition_penalty = 1.2;
    c.decode.max_len = 32;
    c.decode.mode = DecodeMode::greedy;
    c.align_train = {0.1, 0.005, 8, 32, 0};
    c.stage1_train = {0.1, 0.05, 4, 16, 0};
    c.stage2_train = {0.5, 0.01, 6, 16, 0};
    return c;
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    PipelineConfig c = with_defaults();
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.weak_ref = j.value("weak_ref", c.weak_ref);
    c.weak_aligned = j.value("weak_aligned", c.weak_aligned);
    c.strong_ref = j.value("strong_ref", c.strong_ref);
    c.prompts = j.value("prompts", c.prompts);
    c.eval_prompts = j.value("eval_prompts", c.eval_prompts);
    c.self_alignment = j.value("self_alignment", c.self_alignment);
    if (j.contains("decode")) c.decode = decode_from_json(j.at("decode"));
    if (j.contains("align_train")) c.align_train = train_from_json(j.at("align_train"), c.align_train);
    if (j.contains("stage1_train")) c.stage1_train = train_from_json(j.at("stage1_train"), c.stage1_train);
    if (j.contains("stage2_train")) c.stage2_train = train_from_json(j.at("stage2_train"), c.stage2_train);
    c.n_candidates = j.value("n_candidates", c.n_candidates);
    c.yl_temperature = j.value("yl_temperature", c.yl_temperature);
    c.yl_per_prompt = j.value("yl_per_prompt", c.yl_per_prompt);
    if (j.contains("oracle")) c.oracle = oracle_from_json(j.at("oracle"));
    return c;
}

std::string PipelineConfig::to_json_text() const {
    json j{{"seed", seed},
           {"output_dir", output_dir},
           {"weak_ref", weak_ref},
           {"weak_aligned", weak_aligned},
           {"strong_ref", strong_ref},
           {"prompts", prompts},
           {"eval_prompts", eval_prompts},
           {"self_alignment", self_alignment},
           {"decode", decode_to_json(decode)},
           {"align_train", train_to_json(align_train)},
           {"stage1_train", train_to_json(stage1_train)},
           {"stage2_train", train_to_json(stage2_train)},
           {"n_candidates", n_candidates},
           {"yl_temperature", yl_temperature},
           {"yl_per_prompt", yl_per_prompt},
           {"oracle", oracle_to_json(oracle)}};
    return j.dump(2) + "\n";
}

void PipelineConfig::validate() const {
    if (output_dir.empty()) throw std::invalid_argument("output_dir missing");
    if (weak_ref.empty()) throw std::invalid_argument("weak_ref checkpoint missing");
    if (self_alignment) {
        if (!strong_ref.empty() && strong_ref != weak_ref)
            throw std::invalid_argument("self-alignment requires weak_ref == strong_ref");
    } else if (strong_ref.empty()) {
        throw std::invalid_argument("strong_ref checkpoint missing");
    }
    if (prompts.empty()) throw std::invalid_argument("prompt set missing");
    if (eval_prompts.empty()) throw std::invalid_argument("eval prompt set missing");
    if (n_candidates < 2) throw std::invalid_argument("need at least two candidates");
    if (yl_per_prompt < 1) throw std::invalid_argument("yl_per_prompt must be >= 1");
    if (yl_temperature < 0.0) throw std::invalid_argument("invalid temperature");
    decode.validate();
    align_train.validate();
    stage1_train.validate();
    stage2_train.validate();
    oracle.validate();
}

AlignResult align_weak(const LanguageModel& weak_ref, const std::vector<Sequence>& prompts,
                       const OracleSpec& oracle, const DecodeConfig& sample_cfg, int n_candidates,
                       const TrainConfig& cfg) {
    OracleFn scorer = [&](const Sequence& resp) { return oracle_score(oracle, weak_ref.vocab, resp); };
    AlignResult result{weak_ref, {}, {}};
    result.pairs = build_preference_pairs(weak_ref, prompts, scorer, n_candidates, sample_cfg);
    result.model = train_dpo(weak_ref, weak_ref, result.pairs, cfg, &result.loss_log);
    return result;
}

Stage1Result stage1_cd_sft(const LanguageModel& weak_r, const LanguageModel& weak_ref,
                           const LanguageModel& strong_ref, const std::vector<Sequence>& prompts,
                           const DecodeConfig& decode_cfg, const TrainConfig& train_cfg) {
    require_same_vocab(weak_r, weak_ref);
    require_same_vocab(weak_r, strong_ref);

    Stage1Result result{strong_ref, {}, {}, 0, 0.0, {}};
    for (size_t i = 0; i < prompts.size(); ++i) {
        DecodeConfig cfg = decode_cfg;
        cfg.seed = derive_seed(decode_cfg.seed, 1, i);
        Sequence y_w = cd_generate(weak_r, weak_ref, prompts[i], cfg);
        if (text_empty(weak_r.vocab, y_w)) {
            std::cerr << "warning: dropped empty generation for prompt " << i << "\n";
            ++result.n_dropped;
            continue;
        }
        result.mean_implicit_cd += sequence_implicit_reward(weak_r, weak_ref, prompts[i], y_w, 1.0);
        result.d_sft.push_back({prompts[i], std::move(y_w)});
        result.prompt_index.push_back(i);
    }
    if (result.n_dropped * 10 > static_cast<int>(prompts.size()))
        throw std::runtime_error("too many dropped generations");
    if (result.d_sft.empty()) throw std::runtime_error("no usable generations");
    result.mean_implicit_cd /= static_cast<double>(result.d_sft.size());

    result.strong_sft = train_sft(strong_ref, result.d_sft, train_cfg, &result.loss_log);
    return result;
}

Stage2Result stage2_cd_dpo(const LanguageModel& strong_sft, const std::vector<SftExample>& d_sft,
                           const LanguageModel& weak_r, const LanguageModel& weak_ref,
                           const TrainConfig& train_cfg, double yl_temperature, int yl_per_prompt,
                           int max_len, uint64_t seed) {
    Stage2Result result{strong_sft, {}, 0, 0.0, {}};
    DecodeConfig sample_cfg;
    sample_cfg.mode = DecodeMode::sample;
    sample_cfg.temperature = yl_temperature;
    sample_cfg.max_len = max_len;

    for (size_t i = 0; i < d_sft.size(); ++i) {
        for (int rep = 0; rep < yl_per_prompt; ++rep) {
            sample_cfg.seed = derive_seed(seed, 2 + static_cast<uint64_t>(rep), i);
            Sequence y_l = sample_standard(strong_sft, d_sft[i].prompt, sample_cfg);
            if (y_l == d_sft[i].chosen) {
                ++result.n_dropped;
                continue;
            }
            result.d_dpo.push_back({d_sft[i].prompt, d_sft[i].chosen, std::move(y_l)});
        }
    }
    if (result.d_dpo.empty()) throw std::runtime_error("no usable pairs");

    for (const PreferencePair& pr : result.d_dpo) {
        result.reward_gap_mean +=
            sequence_implicit_reward(weak_r, weak_ref, pr.prompt, pr.chosen, 1.0) -
            sequence_implicit_reward(weak_r, weak_ref, pr.prompt, pr.rejected, 1.0);
    }
    result.reward_gap_mean /= static_cast<double>(result.d_dpo.size());

    result.strong_final = train_dpo(strong_sft, strong_sft, result.d_dpo, train_cfg, &result.loss_log);
    return result;
}

BaselineResult weak_sft_baseline(const LanguageModel& weak_r, const LanguageModel& strong_ref,
                                 const std::vector<Sequence>& prompts, const TrainConfig& train_cfg,
                                 int max_len) {
    require_same_vocab(weak_r, strong_ref);
    BaselineResult result{strong_ref, {}, 0, {}};
    DecodeConfig cfg;
    cfg.mode = DecodeMode::greedy;
    cfg.max_len = max_len;
    for (const Sequence& prompt : prompts) {
        Sequence y = sample_standard(weak_r, prompt, cfg);
        if (text_empty(weak_r.vocab, y)) {
            ++result.n_dropped;
            continue;
        }
        result.data.push_back({prompt, std::move(y)});
    }
    if (result.n_dropped * 10 > static_cast<int>(prompts.size()))
        throw std::runtime_error("too many dropped generations");
    if (result.data.empty()) throw std::runtime_error("no usable generations");
    result.model = train_sft(strong_ref, result.data, train_cfg, &result.loss_log);
    return result;
}

namespace {

std::vector<GenerationRecord> to_generation_records(const LanguageModel& pi_r,
                                                    const LanguageModel& pi_ref,
                                                    const std::vector<SftExample>& data, double alpha,
                                                    double lambda, const OracleSpec& oracle) {
    std::vector<GenerationRecord> records;
    records.reserve(data.size());
    for (const SftExample& ex : data) {
        GenerationRecord r;
        r.prompt = pi_r.vocab.decode(ex.prompt);
        r.response = pi_r.vocab.decode(ex.chosen);
        r.alpha = alpha;
        r.lambda = lambda;
        r.implicit_reward = sequence_implicit_reward(pi_r, pi_ref, ex.prompt, ex.chosen, 1.0);
        r.explicit_reward = oracle_score(oracle, pi_r.vocab, ex.chosen);
        r.length = static_cast<int>(r.response.size());
        records.push_back(std::move(r));
    }
    return records;
}

template <class Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

RunManifest run_full_pipeline(const PipelineConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const fs::path out_dir(config.output_dir);
    auto at = [&](const char* rel) { return (out_dir / rel).string(); };

    const std::string canonical_config = config.to_json_text();
    std::ostringstream hash_hex;
    hash_hex << std::hex << fnv1a({canonical_config.data(), canonical_config.size()});
    write_text_file(at("config.json"), canonical_config);

    LanguageModel weak_ref = run_stage("load", [&] { return load_checkpoint(config.weak_ref); });
    LanguageModel strong_ref = config.self_alignment || config.strong_ref == config.weak_ref
                                   ? weak_ref
                                   : run_stage("load", [&] { return load_checkpoint(config.strong_ref); });
    require_same_vocab(weak_ref, strong_ref);

    std::vector<Sequence> prompts =
        encode_prompts(weak_ref.vocab, read_lines(config.prompts));
    std::vector<Sequence> eval_prompts =
        encode_prompts(weak_ref.vocab, read_lines(config.eval_prompts));

    // Weak alignment (or reuse of a provided aligned checkpoint).
    LanguageModel weak_r = weak_ref;
    json align_metrics;
    if (!config.weak_aligned.empty()) {
        weak_r = run_stage("load", [&] { return load_checkpoint(config.weak_aligned); });
        align_metrics["reused"] = config.weak_aligned;
    } else {
        AlignResult aligned = run_stage("align_weak", [&] {
            DecodeConfig sample_cfg = config.decode;
            sample_cfg.mode = DecodeMode::sample;
            sample_cfg.temperature = 1.0;
            sample_cfg.repetition_penalty = 1.0;
            sample_cfg.seed = derive_seed(config.seed, 0xa11);
            TrainConfig cfg = config.align_train;
            cfg.seed = derive_seed(config.seed, 0xa12);
            return align_weak(weak_ref, prompts, config.oracle, sample_cfg, config.n_candidates, cfg);
        });
        weak_r = std::move(aligned.model);
        std::vector<PreferenceRecord> records;
        records.reserve(aligned.pairs.size());
        for (const PreferencePair& pr : aligned.pairs) {
            records.push_back({weak_ref.vocab.decode(pr.prompt), weak_ref.vocab.decode(pr.chosen),
                               weak_ref.vocab.decode(pr.rejected),
                               oracle_score(config.oracle, weak_ref.vocab, pr.chosen),
                               oracle_score(config.oracle, weak_ref.vocab, pr.rejected)});
        }
        write_preference_file(at("align_pairs.jsonl"), records);
        align_metrics["n_pairs"] = aligned.pairs.size();
        align_metrics["initial_loss"] = aligned.loss_log.front();
        align_metrics["final_loss"] = aligned.loss_log.back();
    }
    save_checkpoint(weak_r, at("weak_aligned.ckpt"));

    // Stage 1: contrastive SFT data and the distilled strong model.
    DecodeConfig stage1_decode = config.decode;
    stage1_decode.seed = derive_seed(config.seed, 0x51);
    TrainConfig stage1_cfg = config.stage1_train;
    stage1_cfg.seed = derive_seed(config.seed, 0x52);
    Stage1Result stage1 = run_stage("stage1", [&] {
        return stage1_cd_sft(weak_r, weak_ref, strong_ref, prompts, stage1_decode, stage1_cfg);
    });
    write_generation_batch(at("d_sft.jsonl"),
                           to_generation_records(weak_r, weak_ref, stage1.d_sft, config.decode.alpha,
                                                 config.decode.lambda, config.oracle));
    save_checkpoint(stage1.strong_sft, at("strong_sft.ckpt"));

    // Stage 2: DPO against the stage-1 model's own standard-decoded samples.
    TrainConfig stage2_cfg = config.stage2_train;
    stage2_cfg.seed = derive_seed(config.seed, 0x53);
    Stage2Result stage2 = run_stage("stage2", [&] {
        return stage2_cd_dpo(stage1.strong_sft, stage1.d_sft, weak_r, weak_ref, stage2_cfg,
                             config.yl_temperature, config.yl_per_prompt, config.decode.max_len,
                             config.seed);
    });
    {
        std::vector<PreferenceRecord> records;
        records.reserve(stage2.d_dpo.size());
        for (const PreferencePair& pr : stage2.d_dpo) {
            records.push_back({weak_ref.vocab.decode(pr.prompt), weak_ref.vocab.decode(pr.chosen),
                               weak_ref.vocab.decode(pr.rejected),
                               sequence_implicit_reward(weak_r, weak_ref, pr.prompt, pr.chosen, 1.0),
                               sequence_implicit_reward(weak_r, weak_ref, pr.prompt, pr.rejected, 1.0)});
        }
        write_preference_file(at("d_dpo.jsonl"), records);
    }
    save_checkpoint(stage2.strong_final, at("strong_final.ckpt"));

    // Weak-SFT baseline.
    TrainConfig baseline_cfg = config.stage1_train;
    baseline_cfg.seed = derive_seed(config.seed, 0x54);
    BaselineResult baseline = run_stage("weak_sft_baseline", [&] {
        return weak_sft_baseline(weak_r, strong_ref, prompts, baseline_cfg, config.decode.max_len);
    });
    write_generation_batch(at("weak_sft_data.jsonl"),
                           to_generation_records(weak_r, weak_ref, baseline.data, 1.0, 0.0,
                                                 config.oracle));
    save_checkpoint(baseline.model, at("weak_sft.ckpt"));

    double mean_implicit_std = 0.0;
    for (const SftExample& ex : baseline.data)
        mean_implicit_std += sequence_implicit_reward(weak_r, weak_ref, ex.prompt, ex.chosen, 1.0);
    mean_implicit_std /= static_cast<double>(baseline.data.size());

    // Evaluation on held-out prompts.
    RunManifest manifest;
    run_stage("evaluate", [&] {
        std::vector<std::pair<std::string, const LanguageModel*>> models{
            {"base", &strong_ref},
            {"weak_sft", &baseline.model},
            {"cd_sft", &stage1.strong_sft},
            {"cd_dpo", &stage2.strong_final}};
        manifest.comparison = compare_methods(models, "weak_sft", eval_prompts, config.oracle, &weak_r,
                                              &weak_ref, config.seed, config.decode.max_len);
        std::vector<std::vector<Sequence>> gens;
        std::vector<std::string> labels;
        DecodeConfig greedy_cfg;
        greedy_cfg.mode = DecodeMode::greedy;
        greedy_cfg.max_len = config.decode.max_len;
        for (const auto& [name, model] : models) {
            labels.push_back(name);
            std::vector<Sequence> g;
            g.reserve(eval_prompts.size());
            for (const Sequence& prompt : eval_prompts) g.push_back(sample_standard(*model, prompt, greedy_cfg));
            gens.push_back(std::move(g));
        }
        manifest.eval_win_rates = win_rate_matrix(labels, gens, weak_ref.vocab, config.oracle);
        return 0;
    });
    write_text_file(at("comparison.csv"), manifest.comparison.to_csv());
    write_text_file(at("eval_win_rates.csv"), manifest.eval_win_rates.to_csv());

    manifest.config_hash = hash_hex.str();
    manifest.reward_gap_mean = stage2.reward_gap_mean;
    manifest.dpo_initial_loss = stage2.loss_log.front();

    json metrics;
    metrics["align"] = align_metrics;
    metrics["stage1"] = {{"n_prompts", prompts.size()},
                         {"n_dropped", stage1.n_dropped},
                         {"n_examples", stage1.d_sft.size()},
                         {"mean_implicit_cd", stage1.mean_implicit_cd},
                         {"mean_implicit_standard", mean_implicit_std},
                         {"sft_initial_loss", stage1.loss_log.front()},
                         {"sft_final_loss", stage1.loss_log.back()}};
    metrics["stage2"] = {{"n_pairs", stage2.d_dpo.size()},
                         {"n_dropped", stage2.n_dropped},
                         {"reward_gap_mean", stage2.reward_gap_mean},
                         {"dpo_initial_loss", stage2.loss_log.front()},
                         {"dpo_final_loss", stage2.loss_log.back()}};
    metrics["baseline"] = {{"n_examples", baseline.data.size()},
                           {"n_dropped", baseline.n_dropped},
                           {"sft_initial_loss", baseline.loss_log.front()},
                           {"sft_final_loss", baseline.loss_log.back()}};
    json eval_rows = json::array();
    for (const ComparisonRow& r : manifest.comparison.rows)
        eval_rows.push_back({{"name", r.name},
                             {"mean_oracle", r.mean_oracle},
                             {"win_rate_vs_baseline", r.win_rate_vs_baseline},
                             {"mean_implicit_vs_weak", r.mean_implicit_vs_weak}});
    json win_rates = json::object();
    for (size_t i = 0; i < manifest.eval_win_rates.labels.size(); ++i)
        for (size_t j = 0; j < manifest.eval_win_rates.labels.size(); ++j)
            win_rates[manifest.eval_win_rates.labels[i] + "_vs_" +
                      manifest.eval_win_rates.labels[j]] = manifest.eval_win_rates.entries[i][j];
    metrics["eval"] = {{"rows", eval_rows}, {"win_rates", win_rates}};

    json doc;
    doc["format_version"] = 1;
    doc["config_hash"] = manifest.config_hash;
    doc["seed"] = config.seed;
    doc["mode"] = config.self_alignment ? "self_alignment" : "weak_to_strong";
    doc["inputs"] = {{"weak_ref", config.weak_ref},
                     {"strong_ref", config.self_alignment ? config.weak_ref : config.strong_ref},
                     {"weak_aligned", config.weak_aligned},
                     {"prompts", config.prompts},
                     {"eval_prompts", config.eval_prompts}};
    doc["checkpoints"] = {{"weak_aligned", "weak_aligned.ckpt"},
                          {"strong_sft", "strong_sft.ckpt"},
                          {"strong_final", "strong_final.ckpt"}};
    doc["baselines"] = {{"weak_sft", "weak_sft.ckpt"}};
    doc["datasets"] = {{"align_pairs", config.weak_aligned.empty() ? "align_pairs.jsonl" : ""},
                       {"d_sft", "d_sft.jsonl"},
                       {"d_dpo", "d_dpo.jsonl"},
                       {"weak_sft_data", "weak_sft_data.jsonl"}};
    doc["reports"] = {{"comparison", "comparison.csv"}, {"eval_win_rates", "eval_win_rates.csv"}};
    doc["metrics"] = metrics;
    manifest.json_text = doc.dump(2) + "\n";
    write_text_file(at("manifest.json"), manifest.json_text);
    return manifest;
}

}  // namespace tinyalign
