#include "tinyalign/decode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tinyalign/util.hpp"

namespace tinyalign {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// softmax over finite entries, exact zeros elsewhere.
std::vector<double> masked_softmax(const std::vector<double>& scores) {
    double m = kNegInf;
    for (double s : scores)
        if (s > m) m = s;
    std::vector<double> out(scores.size(), 0.0);
    double z = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] == kNegInf) continue;
        out[i] = std::exp(scores[i] - m);
        z += out[i];
    }
    for (double& p : out)
        if (p != 0.0) p /= z;
    return out;
}

TokenId draw(const std::vector<double>& probs, std::mt19937_64& rng) {
    double r = uniform01(rng);
    double cum = 0.0;
    TokenId last = -1;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last = static_cast<TokenId>(i);
        if (r < cum) return last;
    }
    return last;  // r landed in the rounding slack past the final bucket
}

}  // namespace

void DecodeConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda outside [0,1]");
    if (repetition_penalty < 1.0) throw std::invalid_argument("repetition penalty must be >= 1");
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    if (temperature < 0.0) throw std::invalid_argument("invalid temperature");
}

TokenId argmax_lowest_id(const std::vector<double>& scores) {
    TokenId best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[static_cast<size_t>(best)]) best = static_cast<TokenId>(i);
    return best;
}

void require_same_vocab(const LanguageModel& a, const LanguageModel& b) {
    if (!(a.vocab == b.vocab)) throw std::invalid_argument("vocab mismatch");
}

Sequence sample_standard(const LanguageModel& model, const Sequence& prompt, const DecodeConfig& cfg) {
    if (cfg.temperature < 0.0) throw std::invalid_argument("invalid temperature");
    cfg.validate();

    const bool greedy = cfg.mode == DecodeMode::greedy || cfg.temperature == 0.0;
    std::mt19937_64 rng(cfg.seed);
    Sequence ctx = prompt;
    Sequence out;
    for (int step = 0; step < cfg.max_len; ++step) {
        std::vector<double> logp = logprobs(model, ctx);
        TokenId next;
        if (greedy) {
            next = argmax_lowest_id(logp);
        } else {
            std::vector<double> scaled(logp.size());
            for (size_t i = 0; i < logp.size(); ++i) scaled[i] = logp[i] / cfg.temperature;
            next = draw(masked_softmax(scaled), rng);
        }
        out.push_back(next);
        ctx.push_back(next);
        if (next == Vocab::kEos) break;
    }
    return out;
}

std::vector<TokenId> prune_vocab(const std::vector<double>& pi_r_probs, double lambda) {
    double pmax = 0.0;
    for (double p : pi_r_probs)
        if (p > pmax) pmax = p;
    std::vector<TokenId> head;
    for (size_t i = 0; i < pi_r_probs.size(); ++i)
        if (pi_r_probs[i] >= lambda * pmax) head.push_back(static_cast<TokenId>(i));
    return head;
}

std::vector<double> cd_logits(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                              const Sequence& context, const DecodeConfig& cfg) {
    require_same_vocab(pi_r, pi_ref);
    cfg.validate();

    std::vector<double> lr = logprobs(pi_r, context);
    std::vector<double> lref = logprobs(pi_ref, context);
    std::vector<double> probs_r(lr.size());
    for (size_t i = 0; i < lr.size(); ++i) probs_r[i] = std::exp(lr[i]);

    double pmax = 0.0;
    for (double p : probs_r)
        if (p > pmax) pmax = p;
    const double threshold = cfg.lambda * pmax;

    std::vector<double> scores(lr.size(), kNegInf);
    for (size_t i = 0; i < lr.size(); ++i) {
        if (probs_r[i] < threshold) continue;
        scores[i] = (1.0 - cfg.alpha) * (lr[i] - lref[i]) + cfg.alpha * lr[i];
    }
    return scores;
}

std::vector<double> apply_repetition_penalty(std::vector<double> scores,
                                             const Sequence& generated_so_far, double penalty) {
    if (penalty < 1.0) throw std::invalid_argument("repetition penalty must be >= 1");
    if (penalty == 1.0) return scores;
    std::vector<bool> seen(scores.size(), false);
    for (TokenId t : generated_so_far) {
        if (t < 0 || static_cast<size_t>(t) >= scores.size()) continue;
        if (seen[static_cast<size_t>(t)]) continue;
        seen[static_cast<size_t>(t)] = true;
        double& s = scores[static_cast<size_t>(t)];
        if (s == kNegInf) continue;
        s = s > 0.0 ? s / penalty : s * penalty;
    }
    return scores;
}

std::vector<double> cd_next_token_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                               const Sequence& context, const Sequence& generated_so_far,
                                               const DecodeConfig& cfg) {
    std::vector<double> scores =
        apply_repetition_penalty(cd_logits(pi_r, pi_ref, context, cfg), generated_so_far,
                                 cfg.repetition_penalty);
    return masked_softmax(scores);
}

Sequence cd_generate(const LanguageModel& pi_r, const LanguageModel& pi_ref, const Sequence& prompt,
                     const DecodeConfig& cfg) {
    cfg.validate();
    require_same_vocab(pi_r, pi_ref);

    const bool greedy = cfg.mode == DecodeMode::greedy || cfg.temperature == 0.0;
    std::mt19937_64 rng(cfg.seed);
    Sequence ctx = prompt;
    Sequence out;
    for (int step = 0; step < cfg.max_len; ++step) {
        std::vector<double> scores =
            apply_repetition_penalty(cd_logits(pi_r, pi_ref, ctx, cfg), out, cfg.repetition_penalty);
        TokenId next;
        if (greedy) {
            next = argmax_lowest_id(scores);
        } else {
            for (double& s : scores)
                if (s != kNegInf) s /= cfg.temperature;
            next = draw(masked_softmax(scores), rng);
        }
        out.push_back(next);
        ctx.push_back(next);
        if (next == Vocab::kEos) break;
    }
    return out;
}

}  // namespace tinyalign
