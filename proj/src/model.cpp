#include "tinyalign/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "tinyalign/util.hpp"

namespace tinyalign {

namespace {

const std::string kBosName = "<bos>";
const std::string kEosName = "<eos>";

}  // namespace

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < 2 || tokens[0] != kBosName || tokens[1] != kEosName)
        throw std::invalid_argument("vocab must start with <bos>, <eos>");
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.char_to_id_.fill(-1);
    for (size_t i = 2; i < v.tokens_.size(); ++i) {
        if (v.tokens_[i].size() != 1)
            throw std::invalid_argument("non-reserved tokens must be single characters");
        v.char_to_id_[static_cast<unsigned char>(v.tokens_[i][0])] = static_cast<TokenId>(i);
    }
    return v;
}

TokenId Vocab::id_of(char c) const {
    TokenId id = char_to_id_[static_cast<unsigned char>(c)];
    if (id < 0) throw std::out_of_range("token out of vocabulary");
    return id;
}

Sequence Vocab::encode(std::string_view text) const {
    Sequence out;
    out.reserve(text.size());
    for (char c : text) out.push_back(id_of(c));
    return out;
}

std::string Vocab::decode(const Sequence& ids) const {
    std::string out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        if (id < 0 || id >= size()) throw std::out_of_range("token out of vocabulary");
        if (id == kBos || id == kEos) continue;
        out.push_back(tokens_[static_cast<size_t>(id)][0]);
    }
    return out;
}

Vocab build_vocab(std::string_view corpus) {
    if (corpus.empty()) throw std::invalid_argument("empty corpus");
    std::set<char> distinct(corpus.begin(), corpus.end());
    std::vector<std::string> tokens{kBosName, kEosName};
    for (char c : distinct) tokens.emplace_back(1, c);
    return Vocab::from_tokens(std::move(tokens));
}

NeuralParams NeuralParams::zeros(int vocab_size, int context_window, int dim, int hidden) {
    NeuralParams p;
    p.vocab_size = vocab_size;
    p.context_window = context_window;
    p.dim = dim;
    p.hidden = hidden;
    p.data.assign(p.total_params(), 0.0);
    return p;
}

NeuralParams NeuralParams::random_init(int vocab_size, int context_window, int dim, int hidden,
                                       double stddev, uint64_t seed) {
    NeuralParams p = zeros(vocab_size, context_window, dim, hidden);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, stddev);
    auto emb = p.embedding();
    for (double& w : emb) w = gauss(rng);
    auto hw = p.hidden_w();
    for (double& w : hw) w = gauss(rng);
    auto ow = p.out_w();
    for (double& w : ow) w = gauss(rng);
    // biases stay zero
    return p;
}

LanguageModel LanguageModel::make_neural(Vocab vocab, NeuralParams p) {
    if (p.vocab_size != vocab.size())
        throw std::invalid_argument("neural params vocab size mismatch");
    if (p.context_window < 1) throw std::invalid_argument("context window must be >= 1");
    if (p.data.size() != p.total_params())
        throw std::invalid_argument("neural params shape mismatch");
    LanguageModel m;
    m.kind = ModelKind::neural;
    m.context_window = p.context_window;
    m.vocab = std::move(vocab);
    m.params = std::move(p);
    return m;
}

LanguageModel LanguageModel::make_ngram(Vocab vocab, NGramParams p) {
    if (p.order < 2) throw std::invalid_argument("ngram order must be >= 2");
    if (p.smoothing <= 0.0) throw std::invalid_argument("smoothing must be positive");
    for (const auto& [ctx, row] : p.counts) {
        if (static_cast<int>(ctx.size()) != p.order - 1 ||
            row.size() != static_cast<size_t>(vocab.size()))
            throw std::invalid_argument("ngram count table shape mismatch");
        for (double c : row)
            if (c < 0.0) throw std::invalid_argument("ngram counts must be nonnegative");
    }
    LanguageModel m;
    m.kind = ModelKind::ngram;
    m.context_window = p.order - 1;
    m.vocab = std::move(vocab);
    m.params = std::move(p);
    return m;
}

namespace {

// Last k tokens of `context`, left-padded with BOS so every decoding step is
// well-defined even for an empty prompt.
void padded_context(std::span<const TokenId> context, int k, int vocab_size,
                    std::vector<TokenId>& out) {
    out.assign(static_cast<size_t>(k), Vocab::kBos);
    size_t n = context.size();
    size_t take = std::min<size_t>(n, static_cast<size_t>(k));
    for (size_t i = 0; i < take; ++i) {
        TokenId t = context[n - take + i];
        if (t < 0 || t >= vocab_size) throw std::out_of_range("token out of vocabulary");
        out[static_cast<size_t>(k) - take + i] = t;
    }
    // Validate the truncated-away part too; an invalid id anywhere in the
    // context is a caller bug.
    for (size_t i = 0; i + take < n; ++i)
        if (context[i] < 0 || context[i] >= vocab_size)
            throw std::out_of_range("token out of vocabulary");
}

std::vector<double> ngram_logprobs(const LanguageModel& model, std::span<const TokenId> context) {
    const NGramParams& p = model.ngram();
    const int v = model.vocab.size();
    std::vector<TokenId> ctx;
    padded_context(context, p.order - 1, v, ctx);

    double delta = p.smoothing;
    auto it = p.counts.find(ctx);
    std::vector<double> out(static_cast<size_t>(v));
    if (it == p.counts.end()) {
        // same expression as an all-zero count row, so contexts dropped from
        // a sparse serialization evaluate bit-identically after reload
        double u = std::log(delta) - std::log(delta * v);
        std::fill(out.begin(), out.end(), u);
        return out;
    }
    const std::vector<double>& row = it->second;
    double total = 0.0;
    for (double c : row) total += c;
    double denom = std::log(total + delta * v);
    for (int t = 0; t < v; ++t) out[static_cast<size_t>(t)] = std::log(row[static_cast<size_t>(t)] + delta) - denom;
    return out;
}

}  // namespace

void neural_forward(const LanguageModel& model, std::span<const TokenId> context, NeuralTrace& trace) {
    const NeuralParams& p = model.neural();
    const int v = p.vocab_size, k = p.context_window, d = p.dim, h = p.hidden;

    padded_context(context, k, v, trace.ctx);

    trace.x.resize(static_cast<size_t>(k) * d);
    const double* emb = p.data.data() + p.embedding_offset();
    for (int i = 0; i < k; ++i) {
        const double* row = emb + static_cast<size_t>(trace.ctx[static_cast<size_t>(i)]) * d;
        std::copy(row, row + d, trace.x.data() + static_cast<size_t>(i) * d);
    }

    trace.act.assign(static_cast<size_t>(h), 0.0);
    const double* w1 = p.data.data() + p.hidden_w_offset();
    const double* b1 = p.data.data() + p.hidden_b_offset();
    double* act = trace.act.data();
    for (int j = 0; j < h; ++j) act[j] = b1[j];
    const int kd = k * d;
    for (int i = 0; i < kd; ++i) {
        double xi = trace.x[static_cast<size_t>(i)];
        if (xi == 0.0) continue;
        const double* w1row = w1 + static_cast<size_t>(i) * h;
        for (int j = 0; j < h; ++j) act[j] += xi * w1row[j];
    }
    for (int j = 0; j < h; ++j) act[j] = std::tanh(act[j]);

    trace.logits.assign(static_cast<size_t>(v), 0.0);
    const double* w2 = p.data.data() + p.out_w_offset();
    const double* b2 = p.data.data() + p.out_b_offset();
    double* logits = trace.logits.data();
    for (int t = 0; t < v; ++t) logits[t] = b2[t];
    for (int j = 0; j < h; ++j) {
        double aj = act[j];
        if (aj == 0.0) continue;
        const double* w2row = w2 + static_cast<size_t>(j) * v;
        for (int t = 0; t < v; ++t) logits[t] += aj * w2row[t];
    }

    double lse = logsumexp(trace.logits);
    trace.logp.resize(static_cast<size_t>(v));
    for (int t = 0; t < v; ++t) trace.logp[static_cast<size_t>(t)] = logits[t] - lse;
}

std::vector<double> logprobs(const LanguageModel& model, const Sequence& context) {
    if (model.kind == ModelKind::ngram) return ngram_logprobs(model, context);
    NeuralTrace trace;
    neural_forward(model, context, trace);
    return trace.logp;
}

double sequence_logprob(const LanguageModel& model, const Sequence& prompt, const Sequence& response) {
    if (response.empty()) throw std::invalid_argument("empty response");
    Sequence ctx = prompt;
    ctx.reserve(prompt.size() + response.size());
    double total = 0.0;
    if (model.kind == ModelKind::neural) {
        NeuralTrace trace;
        for (TokenId t : response) {
            neural_forward(model, ctx, trace);
            if (t < 0 || t >= model.vocab.size()) throw std::out_of_range("token out of vocabulary");
            total += trace.logp[static_cast<size_t>(t)];
            ctx.push_back(t);
        }
    } else {
        for (TokenId t : response) {
            std::vector<double> lp = logprobs(model, ctx);
            if (t < 0 || t >= model.vocab.size()) throw std::out_of_range("token out of vocabulary");
            total += lp[static_cast<size_t>(t)];
            ctx.push_back(t);
        }
    }
    return total;
}

LanguageModel ngram_from_corpus(const Vocab& vocab, const std::vector<std::string>& lines,
                                int order, double smoothing) {
    NGramParams p;
    p.order = order;
    p.smoothing = smoothing;
    const int v = vocab.size();
    const int ctx_len = order - 1;
    for (const std::string& line : lines) {
        Sequence ids = vocab.encode(line);
        ids.push_back(Vocab::kEos);
        Sequence full(static_cast<size_t>(ctx_len), Vocab::kBos);
        full.insert(full.end(), ids.begin(), ids.end());
        for (size_t t = static_cast<size_t>(ctx_len); t < full.size(); ++t) {
            Sequence ctx(full.begin() + (t - ctx_len), full.begin() + t);
            auto [it, inserted] = p.counts.try_emplace(std::move(ctx));
            if (inserted) it->second.assign(static_cast<size_t>(v), 0.0);
            it->second[static_cast<size_t>(full[t])] += 1.0;
        }
    }
    return LanguageModel::make_ngram(vocab, std::move(p));
}

}  // namespace tinyalign
