#include "tinyalign/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tinyalign/util.hpp"

namespace tinyalign {

void TrainConfig::validate() const {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

namespace {

void require_neural(const LanguageModel& m) {
    if (m.kind != ModelKind::neural) throw std::invalid_argument("model not trainable");
}

// Backprop scratch, reused across steps and examples.
struct BackBuffers {
    NeuralTrace trace;
    std::vector<double> dlogits;
    std::vector<double> dact;
    std::vector<double> dpre;
};

// Adds weight * d log pi(response | prompt) / d theta into grad and returns
// log pi(response | prompt).
double accumulate_logprob_grad(const LanguageModel& model, const Sequence& prompt,
                               const Sequence& response, double weight, Grad& grad,
                               BackBuffers& buf) {
    const NeuralParams& p = model.neural();
    const int v = p.vocab_size, k = p.context_window, d = p.dim, h = p.hidden;

    Sequence ctx = prompt;
    ctx.reserve(prompt.size() + response.size());
    double total = 0.0;

    const double* w1 = p.data.data() + p.hidden_w_offset();
    const double* w2 = p.data.data() + p.out_w_offset();
    double* g_emb = grad.data() + p.embedding_offset();
    double* g_w1 = grad.data() + p.hidden_w_offset();
    double* g_b1 = grad.data() + p.hidden_b_offset();
    double* g_w2 = grad.data() + p.out_w_offset();
    double* g_b2 = grad.data() + p.out_b_offset();

    for (TokenId target : response) {
        neural_forward(model, ctx, buf.trace);
        if (target < 0 || target >= v) throw std::out_of_range("token out of vocabulary");
        total += buf.trace.logp[static_cast<size_t>(target)];

        // d logp[target] / d logits = onehot(target) - softmax
        buf.dlogits.resize(static_cast<size_t>(v));
        for (int t = 0; t < v; ++t)
            buf.dlogits[static_cast<size_t>(t)] = -weight * std::exp(buf.trace.logp[static_cast<size_t>(t)]);
        buf.dlogits[static_cast<size_t>(target)] += weight;

        buf.dact.assign(static_cast<size_t>(h), 0.0);
        for (int j = 0; j < h; ++j) {
            double aj = buf.trace.act[static_cast<size_t>(j)];
            const double* w2row = w2 + static_cast<size_t>(j) * v;
            double* g_w2row = g_w2 + static_cast<size_t>(j) * v;
            double acc = 0.0;
            for (int t = 0; t < v; ++t) {
                double dl = buf.dlogits[static_cast<size_t>(t)];
                g_w2row[t] += aj * dl;
                acc += w2row[t] * dl;
            }
            buf.dact[static_cast<size_t>(j)] = acc;
        }
        for (int t = 0; t < v; ++t) g_b2[t] += buf.dlogits[static_cast<size_t>(t)];

        buf.dpre.resize(static_cast<size_t>(h));
        for (int j = 0; j < h; ++j) {
            double aj = buf.trace.act[static_cast<size_t>(j)];
            buf.dpre[static_cast<size_t>(j)] = buf.dact[static_cast<size_t>(j)] * (1.0 - aj * aj);
            g_b1[j] += buf.dpre[static_cast<size_t>(j)];
        }

        const int kd = k * d;
        for (int i = 0; i < kd; ++i) {
            double xi = buf.trace.x[static_cast<size_t>(i)];
            const double* w1row = w1 + static_cast<size_t>(i) * h;
            double* g_w1row = g_w1 + static_cast<size_t>(i) * h;
            double dxi = 0.0;
            for (int j = 0; j < h; ++j) {
                double dp = buf.dpre[static_cast<size_t>(j)];
                g_w1row[j] += xi * dp;
                dxi += w1row[j] * dp;
            }
            // embedding slot feeding position i
            int slot = i / d;
            int col = i - slot * d;
            g_emb[static_cast<size_t>(buf.trace.ctx[static_cast<size_t>(slot)]) * d + col] += dxi;
        }

        ctx.push_back(target);
    }
    return total;
}

}  // namespace

std::pair<double, Grad> sft_loss_and_grad(const LanguageModel& model, std::span<const SftExample> batch) {
    require_neural(model);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    Grad grad(model.neural().total_params(), 0.0);
    BackBuffers buf;
    double loss = 0.0;
    const double w = -1.0 / static_cast<double>(batch.size());
    for (const SftExample& ex : batch) {
        if (ex.chosen.empty()) throw std::invalid_argument("empty response");
        loss += w * accumulate_logprob_grad(model, ex.prompt, ex.chosen, w, grad, buf);
    }
    return {loss, std::move(grad)};
}

double sft_loss(const LanguageModel& model, std::span<const SftExample> batch) {
    require_neural(model);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    double loss = 0.0;
    for (const SftExample& ex : batch) {
        if (ex.chosen.empty()) throw std::invalid_argument("empty response");
        loss -= sequence_logprob(model, ex.prompt, ex.chosen);
    }
    return loss / static_cast<double>(batch.size());
}

namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// -log sigmoid(z), stable for both signs.
double softplus_neg(double z) { return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

// DPO with the frozen reference log-probabilities precomputed once.
std::pair<double, Grad> dpo_loss_and_grad_cached(const LanguageModel& policy,
                                                 std::span<const PreferencePair> batch, double beta,
                                                 std::span<const double> ref_chosen_lp,
                                                 std::span<const double> ref_rejected_lp) {
    Grad grad(policy.neural().total_params(), 0.0);
    Grad pair_grad(policy.neural().total_params(), 0.0);
    BackBuffers buf;
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        const PreferencePair& pr = batch[i];
        std::fill(pair_grad.begin(), pair_grad.end(), 0.0);
        double lp_w = accumulate_logprob_grad(policy, pr.prompt, pr.chosen, 1.0, pair_grad, buf);
        double lp_l = accumulate_logprob_grad(policy, pr.prompt, pr.rejected, -1.0, pair_grad, buf);
        double z = beta * ((lp_w - ref_chosen_lp[i]) - (lp_l - ref_rejected_lp[i]));
        loss += inv_n * softplus_neg(z);
        double coeff = -inv_n * beta * sigmoid(-z);
        for (size_t j = 0; j < grad.size(); ++j) grad[j] += coeff * pair_grad[j];
    }
    return {loss, std::move(grad)};
}

void reference_logprobs(const LanguageModel& reference, std::span<const PreferencePair> batch,
                        std::vector<double>& chosen_lp, std::vector<double>& rejected_lp) {
    chosen_lp.resize(batch.size());
    rejected_lp.resize(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        chosen_lp[i] = sequence_logprob(reference, batch[i].prompt, batch[i].chosen);
        rejected_lp[i] = sequence_logprob(reference, batch[i].prompt, batch[i].rejected);
    }
}

void check_dpo_batch(const LanguageModel& policy, const LanguageModel& reference,
                     std::span<const PreferencePair> batch, double beta) {
    require_neural(policy);
    require_same_vocab(policy, reference);
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    if (batch.empty()) throw std::invalid_argument("empty batch");
    for (const PreferencePair& pr : batch)
        if (pr.chosen.empty() || pr.rejected.empty()) throw std::invalid_argument("empty response");
}

}  // namespace

std::pair<double, Grad> dpo_loss_and_grad(const LanguageModel& policy, const LanguageModel& reference,
                                          std::span<const PreferencePair> batch, double beta) {
    check_dpo_batch(policy, reference, batch, beta);
    std::vector<double> ref_w, ref_l;
    reference_logprobs(reference, batch, ref_w, ref_l);
    return dpo_loss_and_grad_cached(policy, batch, beta, ref_w, ref_l);
}

double dpo_loss(const LanguageModel& policy, const LanguageModel& reference,
                std::span<const PreferencePair> batch, double beta) {
    check_dpo_batch(policy, reference, batch, beta);
    double loss = 0.0;
    for (const PreferencePair& pr : batch) {
        double dw = sequence_logprob(policy, pr.prompt, pr.chosen) -
                    sequence_logprob(reference, pr.prompt, pr.chosen);
        double dl = sequence_logprob(policy, pr.prompt, pr.rejected) -
                    sequence_logprob(reference, pr.prompt, pr.rejected);
        loss += softplus_neg(beta * (dw - dl));
    }
    return loss / static_cast<double>(batch.size());
}

namespace {

template <class Batch, class LossGradFn, class FullLossFn>
LanguageModel run_training(LanguageModel model, const Batch& data, const TrainConfig& cfg,
                           std::vector<double>* loss_log, LossGradFn&& loss_grad,
                           FullLossFn&& full_loss) {
    cfg.validate();
    require_neural(model);
    if (data.empty()) throw std::invalid_argument("empty batch");

    if (loss_log) loss_log->push_back(full_loss(model));
    if (cfg.epochs == 0) return model;

    std::mt19937_64 rng(cfg.seed);
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Batch batch;
    batch.reserve(static_cast<size_t>(cfg.batch_size));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            batch.clear();
            for (size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            auto [loss, grad] = loss_grad(model, batch);
            if (!std::isfinite(loss)) throw std::runtime_error("training diverged");
            epoch_loss += loss * static_cast<double>(batch.size());
            double* theta = model.neural().data.data();
            for (size_t j = 0; j < grad.size(); ++j) theta[j] -= cfg.learning_rate * grad[j];
        }
        if (loss_log) loss_log->push_back(epoch_loss / static_cast<double>(data.size()));
    }
    return model;
}

}  // namespace

LanguageModel train_sft(LanguageModel model, const std::vector<SftExample>& data,
                        const TrainConfig& cfg, std::vector<double>* loss_log) {
    return run_training(
        std::move(model), data, cfg, loss_log,
        [](const LanguageModel& m, const std::vector<SftExample>& b) { return sft_loss_and_grad(m, b); },
        [&](const LanguageModel& m) { return sft_loss(m, data); });
}

LanguageModel train_dpo(LanguageModel model, const LanguageModel& reference,
                        const std::vector<PreferencePair>& data, const TrainConfig& cfg,
                        std::vector<double>* loss_log) {
    check_dpo_batch(model, reference, data, cfg.beta);
    // The reference is frozen: its per-pair log-probabilities are computed
    // once up front. Copy them into per-batch views inside the loop.
    std::vector<double> ref_w, ref_l;
    reference_logprobs(reference, data, ref_w, ref_l);

    struct Indexed {
        const PreferencePair* pair;
        double ref_w, ref_l;
    };
    std::vector<Indexed> indexed(data.size());
    for (size_t i = 0; i < data.size(); ++i) indexed[i] = {&data[i], ref_w[i], ref_l[i]};

    return run_training(
        std::move(model), indexed, cfg, loss_log,
        [&](const LanguageModel& m, const std::vector<Indexed>& b) {
            std::vector<PreferencePair> pairs;
            std::vector<double> rw, rl;
            pairs.reserve(b.size());
            rw.reserve(b.size());
            rl.reserve(b.size());
            for (const Indexed& ix : b) {
                pairs.push_back(*ix.pair);
                rw.push_back(ix.ref_w);
                rl.push_back(ix.ref_l);
            }
            return dpo_loss_and_grad_cached(m, pairs, cfg.beta, rw, rl);
        },
        [&](const LanguageModel& m) { return dpo_loss(m, reference, data, cfg.beta); });
}

double grad_check(LossKind kind, const LanguageModel& model, std::span<const SftExample> sft_batch,
                  std::span<const PreferencePair> dpo_batch, const LanguageModel* reference,
                  double beta, uint64_t subsample_seed) {
    require_neural(model);
    if (kind == LossKind::dpo && reference == nullptr)
        throw std::invalid_argument("dpo requires reference");

    auto loss_at = [&](const LanguageModel& m) {
        return kind == LossKind::sft ? sft_loss(m, sft_batch) : dpo_loss(m, *reference, dpo_batch, beta);
    };
    Grad analytic = kind == LossKind::sft ? sft_loss_and_grad(model, sft_batch).second
                                          : dpo_loss_and_grad(model, *reference, dpo_batch, beta).second;

    const size_t n = analytic.size();
    std::vector<size_t> coords;
    if (n <= 5000) {
        coords.resize(n);
        std::iota(coords.begin(), coords.end(), size_t{0});
    } else {
        std::mt19937_64 rng(subsample_seed);
        coords.resize(5000);
        for (size_t& c : coords) c = static_cast<size_t>(rng() % n);
    }

    const double h = 1e-5;
    LanguageModel probe = model;
    double* theta = probe.neural().data.data();
    double worst = 0.0;
    for (size_t c : coords) {
        double saved = theta[c];
        theta[c] = saved + h;
        double up = loss_at(probe);
        theta[c] = saved - h;
        double down = loss_at(probe);
        theta[c] = saved;
        double fd = (up - down) / (2.0 * h);
        double err = std::abs(fd - analytic[c]) / std::max(1e-8, std::abs(fd) + std::abs(analytic[c]));
        if (err > worst) worst = err;
    }
    return worst;
}

std::vector<PreferencePair> build_preference_pairs(const LanguageModel& model,
                                                   const std::vector<Sequence>& prompts,
                                                   const OracleFn& oracle, int n_candidates,
                                                   const DecodeConfig& cfg) {
    if (n_candidates < 2) throw std::invalid_argument("need at least two candidates");
    cfg.validate();

    std::vector<PreferencePair> pairs;
    pairs.reserve(prompts.size());
    for (size_t pi = 0; pi < prompts.size(); ++pi) {
        DecodeConfig sample_cfg = cfg;
        sample_cfg.mode = DecodeMode::sample;
        int best = 0, worst = 0;
        double best_score = 0.0, worst_score = 0.0;
        std::vector<Sequence> candidates(static_cast<size_t>(n_candidates));
        for (int c = 0; c < n_candidates; ++c) {
            sample_cfg.seed = derive_seed(cfg.seed, pi, static_cast<uint64_t>(c));
            candidates[static_cast<size_t>(c)] = sample_standard(model, prompts[pi], sample_cfg);
            double s = oracle(candidates[static_cast<size_t>(c)]);
            if (c == 0 || s > best_score) {
                best = c;
                best_score = s;
            }
            if (c == 0 || s < worst_score) {
                worst = c;
                worst_score = s;
            }
        }
        if (candidates[static_cast<size_t>(best)] == candidates[static_cast<size_t>(worst)]) continue;
        pairs.push_back({prompts[pi], candidates[static_cast<size_t>(best)],
                         candidates[static_cast<size_t>(worst)]});
    }
    return pairs;
}

}  // namespace tinyalign
