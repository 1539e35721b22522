#include "tinyalign/verify.hpp"

#include <cmath>
#include <sstream>

#include "tinyalign/decode.hpp"
#include "tinyalign/reward.hpp"
#include "tinyalign/testgen.hpp"
#include "tinyalign/train.hpp"
#include "tinyalign/util.hpp"

namespace tinyalign {

namespace {

std::vector<double> eta_grid_0_1() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

struct Check {
    bool ok = true;
    double worst = 0.0;

    void track(bool pass, double value) {
        ok = ok && pass;
        if (value > worst) worst = value;
    }
};

}  // namespace

bool run_verification(const std::function<void(const std::string&)>& report) {
    bool all_ok = true;
    auto emit = [&](const std::string& name, bool ok, const std::string& detail) {
        std::ostringstream os;
        os << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")";
        report(os.str());
        all_ok = all_ok && ok;
    };
    std::vector<double> grid = eta_grid_0_1();

    {
        Check c;
        for (uint64_t i = 0; i < 200; ++i) {
            ModelPair pair = random_model_pair(derive_seed(11, i));
            Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(12, i));
            double err = tilting_identity_max_error(pair.pi_r, pair.pi_ref, ctx, grid);
            c.track(err < 1e-6, err);
        }
        std::ostringstream d;
        d << "200 instances, max |dlogZ/deta - E| = " << c.worst;
        emit("tilting identity", c.ok, d.str());
    }

    {
        Check convex, monotone;
        for (uint64_t i = 0; i < 100; ++i) {
            ModelPair pair = random_model_pair(derive_seed(21, i));
            Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(22, i));
            TiltingReport rep = tilting_report(pair.pi_r, pair.pi_ref, ctx, grid);
            for (size_t g = 1; g + 1 < grid.size(); ++g) {
                double second = rep.log_partition[g + 1] - 2.0 * rep.log_partition[g] +
                                rep.log_partition[g - 1];
                convex.track(second >= -1e-9, -second);
            }
            for (size_t g = 1; g < grid.size(); ++g)
                monotone.track(rep.expectation[g] >= rep.expectation[g - 1] - 1e-9,
                               rep.expectation[g - 1] - rep.expectation[g]);
        }
        std::ostringstream d1;
        d1 << "100 instances, min second difference >= -1e-9";
        emit("log-partition convexity", convex.ok, d1.str());
        std::ostringstream d2;
        d2 << "100 instances, E[rhat] non-decreasing in eta";
        emit("expected-reward monotonicity", monotone.ok, d2.str());
    }

    {
        // CD with lambda=0, penalty=1 is the exponential tilting of pi_r by
        // -log pi_ref at eta = 1 - alpha; at alpha = 1 it reduces to pi_r.
        Check c;
        for (uint64_t i = 0; i < 100; ++i) {
            ModelPair pair = random_model_pair(derive_seed(31, i));
            Sequence ctx = random_context(pair.pi_r.vocab, derive_seed(32, i));
            DecodeConfig cfg;
            cfg.lambda = 0.0;
            cfg.repetition_penalty = 1.0;
            cfg.alpha = static_cast<double>(i % 11) / 10.0;
            std::vector<double> cd =
                cd_next_token_distribution(pair.pi_r, pair.pi_ref, ctx, {}, cfg);
            std::vector<double> lr = logprobs(pair.pi_r, ctx);
            std::vector<double> lref = logprobs(pair.pi_ref, ctx);
            std::vector<double> scores(lr.size());
            for (size_t v = 0; v < lr.size(); ++v)
                scores[v] = lr[v] - (1.0 - cfg.alpha) * lref[v];
            double lse = logsumexp(scores);
            for (size_t v = 0; v < cd.size(); ++v) {
                double dev = std::abs(cd[v] - std::exp(scores[v] - lse));
                c.track(dev <= 1e-12, dev);
            }

            cfg.alpha = 1.0;
            std::vector<double> cd1 = cd_next_token_distribution(pair.pi_r, pair.pi_ref, ctx, {}, cfg);
            for (size_t v = 0; v < cd1.size(); ++v)
                c.track(std::abs(cd1[v] - std::exp(lr[v])) <= 1e-12,
                        std::abs(cd1[v] - std::exp(lr[v])));
        }
        std::ostringstream d;
        d << "100 instances, max deviation = " << c.worst;
        emit("cd tilting structure and reduction", c.ok, d.str());
    }

    {
        Check c;
        Vocab vocab = toy_vocab(3);
        for (uint64_t i = 0; i < 20; ++i) {
            LanguageModel model = random_neural_model(vocab, 2, 3, 4, derive_seed(41, i));
            std::vector<SftExample> batch;
            for (uint64_t b = 0; b < 3; ++b) {
                Sequence prompt = random_context(vocab, derive_seed(42, i * 8 + b), 3);
                Sequence resp = random_context(vocab, derive_seed(43, i * 8 + b), 4);
                if (resp.empty()) resp.push_back(Vocab::kEos);
                batch.push_back({prompt, resp});
            }
            double err = grad_check(LossKind::sft, model, batch, {}, nullptr);
            c.track(err < 1e-4, err);
        }
        std::ostringstream d;
        d << "20 instances, max relative error = " << c.worst;
        emit("sft gradient check", c.ok, d.str());
    }

    {
        Check c;
        double worst_anchor = 0.0;
        Vocab vocab = toy_vocab(3);
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
            double err = grad_check(LossKind::dpo, policy, {}, batch, &reference, 0.3);
            c.track(err < 1e-4, err);
            double anchor = std::abs(dpo_loss(policy, policy, batch, 0.3) - std::log(2.0));
            worst_anchor = std::max(worst_anchor, anchor);
            c.track(anchor <= 1e-9, anchor);
        }
        std::ostringstream d;
        d << "20 instances, max relative error = " << c.worst << ", ln2 anchor error = " << worst_anchor;
        emit("dpo gradient check and ln2 anchor", c.ok, d.str());
    }

    {
        // Exact for the ratio-tilted family; statistical for the contrastive family.
        int hold = 0;
        const int n = 100;
        for (uint64_t i = 0; i < n; ++i) {
            ModelPair pair = random_model_pair(derive_seed(61, i));
            Sequence prompt = random_context(pair.pi_r.vocab, derive_seed(62, i), 3);
            double e_cd = enumerate_expected_reward(pair.pi_r, pair.pi_ref, prompt,
                                                    PolicySpec::contrastive(0.3), 3);
            double e_std = enumerate_expected_reward(pair.pi_r, pair.pi_ref, prompt,
                                                     PolicySpec::standard(), 3);
            if (e_cd >= e_std - 1e-12) ++hold;
        }
        std::ostringstream d;
        d << hold << "/" << n << " instances with E_cd(0.3) >= E_standard (exact enumeration)";
        emit("sequence-level reward dominance rate", hold >= n * 90 / 100, d.str());
    }

    {
        Check c;
        DecodeConfig cfg;
        cfg.lambda = 0.1;
        cfg.alpha = 0.4;
        cfg.repetition_penalty = 1.2;
        cfg.max_len = 3;
        for (uint64_t i = 0; i < 50; ++i) {
            ModelPair pair = random_model_pair(derive_seed(71, i));
            Sequence prompt = random_context(pair.pi_r.vocab, derive_seed(72, i), 3);
            Sequence got = cd_generate(pair.pi_r, pair.pi_ref, prompt, cfg);
            // stepwise argmax against the enumeration oracle's distributions
            PolicySpec policy = PolicySpec::contrastive(cfg.alpha, cfg.lambda, cfg.repetition_penalty);
            Sequence want;
            Sequence ctx = prompt;
            for (int step = 0; step < cfg.max_len; ++step) {
                std::vector<double> q =
                    enumeration_step_distribution(pair.pi_r, pair.pi_ref, ctx, want, policy);
                TokenId next = argmax_lowest_id(q);
                want.push_back(next);
                ctx.push_back(next);
                if (next == Vocab::kEos) break;
            }
            c.track(got == want, got == want ? 0.0 : 1.0);
        }
        std::ostringstream d;
        d << "50 instances, greedy path identical to oracle";
        emit("greedy cd oracle agreement", c.ok, d.str());
    }

    return all_ok;
}

}  // namespace tinyalign
