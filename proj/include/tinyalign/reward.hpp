#pragma once

#include <vector>

#include "tinyalign/decode.hpp"
#include "tinyalign/model.hpp"

namespace tinyalign {

// Per-eta grid of partition/expectation/variance under the tilted
// next-token distribution p_eta(v) ~ pi_r(v) * exp(eta * rhat(v)).
struct TiltingReport {
    std::vector<double> eta_grid;
    std::vector<double> log_partition;
    std::vector<double> expectation;
    std::vector<double> variance;
};

// One generated response worth of analysis: implicit reward, explicit
// (oracle) reward, and token length.
struct RewardRecord {
    double implicit = 0.0;
    double explicit_reward = 0.0;
    int length = 0;
};

// beta * (log pi_r(token|context) - log pi_ref(token|context)).
double token_implicit_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const Sequence& context, TokenId token, double beta);

// Token-level factorization summed over the response; equals
// beta * (log pi_r(y|x) - log pi_ref(y|x)).
double sequence_implicit_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                const Sequence& prompt, const Sequence& response, double beta);

// p(v) = pi_r(v) * exp(eta * rhat(v)) / Z(eta), with rhat the unscaled
// log-ratio. eta = 0 recovers pi_r; eta = 1 - alpha matches contrastive
// decoding with lambda = 0 and no penalty.
std::vector<double> tilted_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                        const Sequence& context, double eta);

// log Z, E[rhat] and Var[rhat] along an increasing eta grid in [0,1].
TiltingReport tilting_report(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                             const Sequence& context, const std::vector<double>& eta_grid);

// max over interior grid points of |central-difference d logZ/d eta - E[rhat]|
// at step h; the numerical check that the tilting derivative identity holds.
double tilting_identity_max_error(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                  const Sequence& context, const std::vector<double>& eta_grid,
                                  double h = 1e-4);

// Sequence-level policy for the enumeration oracle.
struct PolicySpec {
    enum class Kind { standard, contrastive };
    Kind kind = Kind::standard;
    double alpha = 1.0;
    double lambda = 0.0;
    double repetition_penalty = 1.0;

    static PolicySpec standard() { return {}; }
    static PolicySpec contrastive(double alpha, double lambda = 0.0, double penalty = 1.0) {
        return {Kind::contrastive, alpha, lambda, penalty};
    }
};

// Per-step distribution as the enumeration oracle computes it, straight from
// model log-probabilities. Deliberately does not reuse the cd module.
std::vector<double> enumeration_step_distribution(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                                  const Sequence& context, const Sequence& generated_so_far,
                                                  const PolicySpec& policy);

// Exact E[rhat(x, Y)] where Y ranges over every response of length <= max_len
// (EOS-terminated early, truncated at max_len otherwise) under the given
// policy. Feasible only while V^max_len <= 1e6.
double enumerate_expected_reward(const LanguageModel& pi_r, const LanguageModel& pi_ref,
                                 const Sequence& prompt, const PolicySpec& policy, int max_len,
                                 double beta = 1.0);

}  // namespace tinyalign
