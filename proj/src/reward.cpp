#include "tinyalign/reward.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tinyalign/util.hpp"

namespace tinyalign {

double token_implicit_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const Sequence& context, TokenId token, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    require_same_vocab(pi_r, pi_ref);
    if (token < 0 || token >= pi_r.vocab.size()) throw std::out_of_range("token out of vocabulary");
    std::vector<double> lr = logprobs(pi_r, context);
    std::vector<double> lref = logprobs(pi_ref, context);
    return beta * (lr[static_cast<size_t>(token)] - lref[static_cast<size_t>(token)]);
}

double sequence_implicit_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                const Sequence& prompt, const Sequence& response, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    require_same_vocab(pi_r, pi_ref);
    if (response.empty()) throw std::invalid_argument("empty response");
    Sequence ctx = prompt;
    double total = 0.0;
    for (TokenId t : response) {
        std::vector<double> lr = logprobs(pi_r, ctx);
        std::vector<double> lref = logprobs(pi_ref, ctx);
        if (t < 0 || t >= pi_r.vocab.size()) throw std::out_of_range("token out of vocabulary");
        total += lr[static_cast<size_t>(t)] - lref[static_cast<size_t>(t)];
        ctx.push_back(t);
    }
    return beta * total;
}

namespace {

// logits of the tilted distribution: log pi_r + eta * rhat.
std::vector<double> tilted_scores(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                  const Sequence& context, double eta, std::vector<double>* rhat_out) {
    std::vector<double> lr = logprobs(pi_r, context);
    std::vector<double> lref = logprobs(pi_ref, context);
    std::vector<double> scores(lr.size());
    if (rhat_out) rhat_out->resize(lr.size());
    for (size_t i = 0; i < lr.size(); ++i) {
        double rhat = lr[i] - lref[i];
        scores[i] = lr[i] + eta * rhat;
        if (rhat_out) (*rhat_out)[i] = rhat;
    }
    return scores;
}

}  // namespace

std::vector<double> tilted_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                        const Sequence& context, double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta outside [0,1]");
    require_same_vocab(pi_r, pi_ref);
    std::vector<double> scores = tilted_scores(pi_r, pi_ref, context, eta, nullptr);
    double lse = logsumexp(scores);
    std::vector<double> p(scores.size());
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::exp(scores[i] - lse);
    return p;
}

TiltingReport tilting_report(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const Sequence& context, const std::vector<double>& eta_grid) {
    if (eta_grid.empty()) throw std::invalid_argument("empty eta grid");
    for (size_t i = 0; i < eta_grid.size(); ++i) {
        if (eta_grid[i] < 0.0 || eta_grid[i] > 1.0) throw std::invalid_argument("eta outside [0,1]");
        if (i > 0 && eta_grid[i] <= eta_grid[i - 1])
            throw std::invalid_argument("eta grid must be strictly increasing");
    }
    require_same_vocab(pi_r, pi_ref);

    TiltingReport report;
    report.eta_grid = eta_grid;
    std::vector<double> rhat;
    for (double eta : eta_grid) {
        std::vector<double> scores = tilted_scores(pi_r, pi_ref, context, eta, &rhat);
        // Z(eta) = sum_v pi_r(v) exp(eta rhat(v)); explicit summation over
        // the vocabulary in log space.
        double log_z = logsumexp(scores);
        double mean = 0.0;
        std::vector<double> p(scores.size());
        for (size_t i = 0; i < scores.size(); ++i) {
            p[i] = std::exp(scores[i] - log_z);
            mean += p[i] * rhat[i];
        }
        double var = 0.0;
        for (size_t i = 0; i < scores.size(); ++i) {
            double d = rhat[i] - mean;
            var += p[i] * d * d;
        }
        report.log_partition.push_back(log_z);
        report.expectation.push_back(mean);
        report.variance.push_back(var);
    }
    return report;
}

double tilting_identity_max_error(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                  const Sequence& context, const std::vector<double>& eta_grid,
                                  double h) {
    TiltingReport report = tilting_report(pi_r, pi_ref, context, eta_grid);
    double worst = 0.0;
    for (size_t i = 1; i + 1 < eta_grid.size(); ++i) {
        double eta = eta_grid[i];
        double hi = logsumexp(tilted_scores(pi_r, pi_ref, context, eta + h, nullptr));
        double lo = logsumexp(tilted_scores(pi_r, pi_ref, context, eta - h, nullptr));
        double fd = (hi - lo) / (2.0 * h);
        double err = std::abs(fd - report.expectation[i]);
        if (err > worst) worst = err;
    }
    return worst;
}

std::vector<double> enumeration_step_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                                  const Sequence& context, const Sequence& generated_so_far,
                                                  const PolicySpec& policy) {
    std::vector<double> lr = logprobs(pi_r, context);
    const size_t v = lr.size();
    std::vector<double> probs(v);

    if (policy.kind == PolicySpec::Kind::standard) {
        for (size_t i = 0; i < v; ++i) probs[i] = std::exp(lr[i]);
        return probs;
    }

    std::vector<double> lref = logprobs(pi_ref, context);
    double pmax = 0.0;
    for (size_t i = 0; i < v; ++i) pmax = std::max(pmax, std::exp(lr[i]));
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> scores(v, neg_inf);
    for (size_t i = 0; i < v; ++i) {
        if (std::exp(lr[i]) < policy.lambda * pmax) continue;
        scores[i] = (1.0 - policy.alpha) * (lr[i] - lref[i]) + policy.alpha * lr[i];
    }
    if (policy.repetition_penalty != 1.0) {
        std::vector<bool> seen(v, false);
        for (TokenId t : generated_so_far) {
            if (t < 0 || static_cast<size_t>(t) >= v || seen[static_cast<size_t>(t)]) continue;
            seen[static_cast<size_t>(t)] = true;
            double& s = scores[static_cast<size_t>(t)];
            if (s == neg_inf) continue;
            s = s > 0.0 ? s / policy.repetition_penalty : s * policy.repetition_penalty;
        }
    }
    double m = neg_inf;
    for (double s : scores)
        if (s > m) m = s;
    double z = 0.0;
    for (size_t i = 0; i < v; ++i) {
        probs[i] = scores[i] == neg_inf ? 0.0 : std::exp(scores[i] - m);
        z += probs[i];
    }
    for (double& p : probs)
        if (p != 0.0) p /= z;
    return probs;
}

namespace {

struct Enumerator {
    const LanguageModel& pi_r;
    const LanguageModel& pi_ref;
    const PolicySpec& policy;
    int max_len;
    double beta;
    Sequence ctx;        // prompt plus generated prefix
    Sequence generated;  // generated prefix only
    double total = 0.0;  // sum over leaves of P(leaf) * rhat(leaf)

    void walk(double prob_prefix, double reward_prefix) {
        std::vector<double> q = enumeration_step_distribution(pi_r, pi_ref, ctx, generated, policy);
        std::vector<double> lr = logprobs(pi_r, ctx);
        std::vector<double> lref = logprobs(pi_ref, ctx);
        const int depth = static_cast<int>(generated.size());
        for (size_t v = 0; v < q.size(); ++v) {
            if (q[v] == 0.0) continue;
            double p = prob_prefix * q[v];
            double r = reward_prefix + beta * (lr[v] - lref[v]);
            TokenId t = static_cast<TokenId>(v);
            if (t == Vocab::kEos || depth + 1 == max_len) {
                total += p * r;
                continue;
            }
            ctx.push_back(t);
            generated.push_back(t);
            walk(p, r);
            ctx.pop_back();
            generated.pop_back();
        }
    }
};

}  // namespace

double enumerate_expected_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                 const Sequence& prompt, const PolicySpec& policy, int max_len,
                                 double beta) {
    require_same_vocab(pi_r, pi_ref);
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    double states = std::pow(static_cast<double>(pi_r.vocab.size()), static_cast<double>(max_len));
    if (states > 1e6) throw std::invalid_argument("state space too large");

    Enumerator e{pi_r, pi_ref, policy, max_len, beta, prompt, {}, 0.0};
    e.walk(1.0, 0.0);
    return e.total;
}

}  // namespace tinyalign
