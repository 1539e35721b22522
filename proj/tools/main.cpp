// tinyalign command-line driver: data generation, base-model training, weak
// alignment, contrastive generation, the two-stage pipeline, analysis sweeps,
// and the numeric verification suite.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tinyalign/checkpoint.hpp"
#include "tinyalign/corpus.hpp"
#include "tinyalign/decode.hpp"
#include "tinyalign/eval.hpp"
#include "tinyalign/io.hpp"
#include "tinyalign/model.hpp"
#include "tinyalign/oracle.hpp"
#include "tinyalign/pipeline.hpp"
#include "tinyalign/reward.hpp"
#include "tinyalign/train.hpp"
#include "tinyalign/util.hpp"
#include "tinyalign/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tinyalign;

namespace {

std::vector<double> parse_grid(const std::string& grid) {
    std::vector<double> values;
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stod(item));
    }
    if (values.empty()) throw std::runtime_error("empty grid");
    return values;
}

int cmd_gen_data(const std::string& out_dir, uint64_t seed, int corpus_lines, int train_prompts,
                 int eval_prompts) {
    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_lines((dir / "corpus.txt").string(), make_corpus(seed, corpus_lines));
    write_lines((dir / "train_prompts.txt").string(), make_prompts(derive_seed(seed, 1), train_prompts));
    write_lines((dir / "eval_prompts.txt").string(), make_prompts(derive_seed(seed, 2), eval_prompts));
    std::cout << "wrote corpus (" << corpus_lines << " lines) and prompt sets (" << train_prompts
              << " train / " << eval_prompts << " eval) to " << out_dir << "\n";
    return 0;
}

int cmd_train_base(const std::string& role, const std::string& config_path) {
    json cfg = json::parse(read_text_file(config_path));
    std::string corpus_path = cfg.at("corpus").get<std::string>();
    uint64_t seed = cfg.value("seed", 1);

    json dims = cfg.value(role, json::object());
    std::string out_path = dims.value("out", role + "_ref.ckpt");
    int dim = dims.value("dim", role == "weak" ? 16 : 32);
    int hidden = dims.value("hidden", role == "weak" ? 32 : 128);
    int context_window = dims.value("context_window", role == "weak" ? 4 : 8);

    TrainConfig train_cfg;
    train_cfg.learning_rate = 0.05;
    train_cfg.epochs = 12;
    train_cfg.batch_size = 16;
    if (cfg.contains("train")) {
        const json& t = cfg.at("train");
        train_cfg.learning_rate = t.value("learning_rate", train_cfg.learning_rate);
        train_cfg.epochs = t.value("epochs", train_cfg.epochs);
        train_cfg.batch_size = t.value("batch_size", train_cfg.batch_size);
    }
    train_cfg.seed = derive_seed(seed, role == "weak" ? 0x17ull : 0x18ull);

    std::vector<std::string> lines = read_lines(corpus_path);
    std::string joined;
    for (const std::string& l : lines) joined += l;
    Vocab vocab = build_vocab(joined);

    std::vector<SftExample> data;
    data.reserve(lines.size());
    for (const std::string& l : lines) data.push_back({{}, to_response(vocab, l)});

    NeuralParams params = NeuralParams::random_init(vocab.size(), context_window, dim, hidden, 0.08,
                                                    derive_seed(seed, role == "weak" ? 0x27ull : 0x28ull));
    LanguageModel model = LanguageModel::make_neural(vocab, std::move(params));
    std::vector<double> losses;
    model = train_sft(std::move(model), data, train_cfg, &losses);
    for (size_t e = 0; e < losses.size(); ++e)
        std::cout << (e == 0 ? "initial" : "epoch " + std::to_string(e)) << " loss " << losses[e] << "\n";
    save_checkpoint(model, out_path);
    std::cout << "wrote " << out_path << " (V=" << vocab.size() << ", d=" << dim << ", h=" << hidden
              << ", k=" << context_window << ")\n";
    return 0;
}

int cmd_align_weak(const std::string& config_path) {
    json cfg = json::parse(read_text_file(config_path));
    LanguageModel weak_ref = load_checkpoint(cfg.at("weak_ref").get<std::string>());
    std::vector<Sequence> prompts =
        encode_prompts(weak_ref.vocab, read_lines(cfg.at("prompts").get<std::string>()));
    uint64_t seed = cfg.value("seed", 1);

    DecodeConfig sample_cfg;
    sample_cfg.mode = DecodeMode::sample;
    sample_cfg.temperature = 1.0;
    sample_cfg.repetition_penalty = 1.0;
    sample_cfg.max_len = cfg.value("max_len", 32);
    sample_cfg.seed = derive_seed(seed, 0xa11);

    TrainConfig train_cfg{0.1, 0.02, 8, 16, derive_seed(seed, 0xa12)};
    if (cfg.contains("train")) {
        const json& t = cfg.at("train");
        train_cfg.beta = t.value("beta", train_cfg.beta);
        train_cfg.learning_rate = t.value("learning_rate", train_cfg.learning_rate);
        train_cfg.epochs = t.value("epochs", train_cfg.epochs);
        train_cfg.batch_size = t.value("batch_size", train_cfg.batch_size);
    }

    AlignResult result = align_weak(weak_ref, prompts, OracleSpec::defaults(), sample_cfg,
                                    cfg.value("n_candidates", 5), train_cfg);
    std::string out = cfg.value("out", std::string("weak_aligned.ckpt"));
    save_checkpoint(result.model, out);
    std::cout << "aligned on " << result.pairs.size() << " pairs; dpo loss " << result.loss_log.front()
              << " -> " << result.loss_log.back() << "; wrote " << out << "\n";
    return 0;
}

int cmd_cd_gen(const std::string& pi_r_path, const std::string& pi_ref_path,
               const std::string& prompts_path, const std::string& out_path, double alpha,
               double lambda, double penalty, int max_len) {
    LanguageModel pi_r = load_checkpoint(pi_r_path);
    LanguageModel pi_ref = load_checkpoint(pi_ref_path);
    std::vector<std::string> prompt_text = read_lines(prompts_path);
    std::vector<Sequence> prompts = encode_prompts(pi_r.vocab, prompt_text);

    DecodeConfig cfg;
    cfg.alpha = alpha;
    cfg.lambda = lambda;
    cfg.repetition_penalty = penalty;
    cfg.max_len = max_len;
    cfg.mode = DecodeMode::greedy;

    OracleSpec oracle = OracleSpec::defaults();
    std::vector<GenerationRecord> records;
    records.reserve(prompts.size());
    for (size_t i = 0; i < prompts.size(); ++i) {
        Sequence y = cd_generate(pi_r, pi_ref, prompts[i], cfg);
        GenerationRecord r;
        r.prompt = prompt_text[i];
        r.response = pi_r.vocab.decode(y);
        r.alpha = alpha;
        r.lambda = lambda;
        r.implicit_reward = sequence_implicit_reward(pi_r, pi_ref, prompts[i], y, 1.0);
        r.explicit_reward = oracle_score(oracle, pi_r.vocab, y);
        r.length = static_cast<int>(r.response.size());
        records.push_back(std::move(r));
    }
    write_generation_batch(out_path, records);
    std::cout << "wrote " << records.size() << " generations to " << out_path << "\n";
    return 0;
}

int cmd_pipeline_run(const std::string& config_path, bool self_align) {
    PipelineConfig config = PipelineConfig::from_json_text(read_text_file(config_path));
    if (self_align) {
        config.self_alignment = true;
        config.strong_ref = config.weak_ref;
    }
    RunManifest manifest = run_full_pipeline(config);
    std::cout << "pipeline complete; config hash " << manifest.config_hash << "\n";
    std::cout << manifest.comparison.to_csv();
    std::cout << "reward gap " << manifest.reward_gap_mean << ", first dpo loss "
              << manifest.dpo_initial_loss << "\n";
    return 0;
}

int cmd_sweep_alpha(const std::string& pi_r_path, const std::string& pi_ref_path,
                    const std::string& prompts_path, const std::string& grid,
                    const std::string& out_dir, double lambda, double penalty, int max_len) {
    LanguageModel pi_r = load_checkpoint(pi_r_path);
    LanguageModel pi_ref = load_checkpoint(pi_ref_path);
    std::vector<Sequence> prompts = encode_prompts(pi_r.vocab, read_lines(prompts_path));

    DecodeConfig cfg;
    cfg.lambda = lambda;
    cfg.repetition_penalty = penalty;
    cfg.max_len = max_len;

    AlphaSweepReport report =
        alpha_sweep(pi_r, pi_ref, prompts, parse_grid(grid), OracleSpec::defaults(), cfg);
    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_text_file((dir / "alpha_sweep.csv").string(), report.rows_to_csv());
    write_text_file((dir / "alpha_win_rates.csv").string(), report.win_rates.to_csv());
    std::cout << report.rows_to_csv();
    return 0;
}

int cmd_eval_compare(const std::vector<std::string>& model_specs, const std::string& baseline,
                     const std::string& prompts_path, const std::string& out_dir,
                     const std::string& weak_r_path, const std::string& weak_ref_path,
                     uint64_t seed, int max_len) {
    std::vector<std::pair<std::string, LanguageModel>> loaded;
    for (const std::string& spec : model_specs) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos) throw std::runtime_error("model spec must be NAME=CHECKPOINT");
        loaded.emplace_back(spec.substr(0, eq), load_checkpoint(spec.substr(eq + 1)));
    }
    if (loaded.empty()) throw std::runtime_error("no models given");
    std::vector<std::pair<std::string, const LanguageModel*>> models;
    for (const auto& [name, model] : loaded) models.emplace_back(name, &model);

    std::vector<Sequence> prompts = encode_prompts(loaded[0].second.vocab, read_lines(prompts_path));
    LanguageModel weak_r, weak_ref;
    const LanguageModel* weak_r_ptr = nullptr;
    const LanguageModel* weak_ref_ptr = nullptr;
    if (!weak_r_path.empty() && !weak_ref_path.empty()) {
        weak_r = load_checkpoint(weak_r_path);
        weak_ref = load_checkpoint(weak_ref_path);
        weak_r_ptr = &weak_r;
        weak_ref_ptr = &weak_ref;
    }

    ComparisonTable table = compare_methods(models, baseline, prompts, OracleSpec::defaults(),
                                            weak_r_ptr, weak_ref_ptr, seed, max_len);
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "comparison.csv").string(), table.to_csv());
    std::cout << table.to_csv();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale contrastive decoding and weak-to-strong training lab"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate the toy corpus and prompt sets");
    std::string gen_out = "data";
    uint64_t gen_seed = 1;
    int corpus_lines = 1200, train_prompts = 1000, eval_prompts = 300;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--corpus-lines", corpus_lines, "corpus size");
    gen->add_option("--train-prompts", train_prompts, "training prompt count");
    gen->add_option("--eval-prompts", eval_prompts, "evaluation prompt count");

    // train-base
    auto* tb = app.add_subcommand("train-base", "train a reference model on the toy corpus");
    std::string tb_role, tb_config;
    tb->add_option("--role", tb_role, "weak|strong")->required()->check(CLI::IsMember({"weak", "strong"}));
    tb->add_option("--config", tb_config, "config file")->required();

    // align-weak
    auto* aw = app.add_subcommand("align-weak", "DPO-align the weak reference model");
    std::string aw_config;
    aw->add_option("--config", aw_config, "config file")->required();

    // cd-gen
    auto* cg = app.add_subcommand("cd-gen", "emit contrastive generations");
    std::string cg_pi_r, cg_pi_ref, cg_prompts, cg_out;
    double cg_alpha = 0.4, cg_lambda = 0.1, cg_penalty = 1.2;
    int cg_max_len = 32;
    cg->add_option("--pi-r", cg_pi_r, "aligned model checkpoint")->required();
    cg->add_option("--pi-ref", cg_pi_ref, "reference model checkpoint")->required();
    cg->add_option("--alpha", cg_alpha, "contrastive coefficient");
    cg->add_option("--lambda", cg_lambda, "pruning threshold");
    cg->add_option("--penalty", cg_penalty, "repetition penalty");
    cg->add_option("--max-len", cg_max_len, "max response tokens");
    cg->add_option("--prompts", cg_prompts, "prompt file")->required();
    cg->add_option("--out", cg_out, "output generation batch")->required();

    // pipeline run
    auto* pl = app.add_subcommand("pipeline", "two-stage pipeline");
    auto* pr = pl->add_subcommand("run", "run the full pipeline");
    std::string pr_config;
    bool pr_self_align = false;
    pr->add_option("--config", pr_config, "pipeline config")->required();
    pr->add_flag("--self-align", pr_self_align, "force weak_ref == strong_ref");
    pl->require_subcommand(1);

    // sweep-alpha
    auto* sw = app.add_subcommand("sweep-alpha", "alpha sweep analysis artifacts");
    std::string sw_pi_r, sw_pi_ref, sw_prompts, sw_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    std::string sw_out = "sweep";
    double sw_lambda = 0.1, sw_penalty = 1.2;
    int sw_max_len = 32;
    sw->add_option("--pi-r", sw_pi_r, "aligned model checkpoint")->required();
    sw->add_option("--pi-ref", sw_pi_ref, "reference model checkpoint")->required();
    sw->add_option("--prompts", sw_prompts, "prompt file")->required();
    sw->add_option("--grid", sw_grid, "comma-separated alpha grid");
    sw->add_option("--out", sw_out, "output directory");
    sw->add_option("--lambda", sw_lambda, "pruning threshold");
    sw->add_option("--penalty", sw_penalty, "repetition penalty");
    sw->add_option("--max-len", sw_max_len, "max response tokens");

    // eval compare
    auto* ev = app.add_subcommand("eval", "evaluation tables");
    auto* ec = ev->add_subcommand("compare", "method comparison table");
    std::vector<std::string> ec_models;
    std::string ec_baseline, ec_prompts, ec_out = "eval";
    std::string ec_weak_r, ec_weak_ref;
    uint64_t ec_seed = 1;
    int ec_max_len = 32;
    ec->add_option("--models", ec_models, "NAME=CHECKPOINT entries")->required()->delimiter(',');
    ec->add_option("--baseline", ec_baseline, "baseline model name")->required();
    ec->add_option("--prompts", ec_prompts, "eval prompt file")->required();
    ec->add_option("--out", ec_out, "output directory");
    ec->add_option("--weak-r", ec_weak_r, "aligned weak checkpoint for implicit rewards");
    ec->add_option("--weak-ref", ec_weak_ref, "weak reference checkpoint for implicit rewards");
    ec->add_option("--seed", ec_seed, "seed column value");
    ec->add_option("--max-len", ec_max_len, "max response tokens");
    ev->require_subcommand(1);

    // verify
    auto* vf = app.add_subcommand("verify", "run the numeric property suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(gen_out, gen_seed, corpus_lines, train_prompts, eval_prompts);
        if (tb->parsed()) return cmd_train_base(tb_role, tb_config);
        if (aw->parsed()) return cmd_align_weak(aw_config);
        if (cg->parsed())
            return cmd_cd_gen(cg_pi_r, cg_pi_ref, cg_prompts, cg_out, cg_alpha, cg_lambda, cg_penalty,
                              cg_max_len);
        if (pl->parsed()) return cmd_pipeline_run(pr_config, pr_self_align);
        if (sw->parsed())
            return cmd_sweep_alpha(sw_pi_r, sw_pi_ref, sw_prompts, sw_grid, sw_out, sw_lambda,
                                   sw_penalty, sw_max_len);
        if (ev->parsed())
            return cmd_eval_compare(ec_models, ec_baseline, ec_prompts, ec_out, ec_weak_r, ec_weak_ref,
                                    ec_seed, ec_max_len);
        if (vf->parsed()) {
            bool ok = run_verification([](const std::string& line) { std::cout << line << "\n"; });
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
