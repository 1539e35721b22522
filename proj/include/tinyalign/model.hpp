#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tinyalign {

using TokenId = int32_t;

// A token sequence. Prompts never contain reserved tokens; responses may
// carry EOS once, as their final element.
using Sequence = std::vector<TokenId>;

// Character-level vocabulary. Ids are dense: BOS=0, EOS=1, then the distinct
// corpus characters sorted by code point.
class Vocab {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;

    Vocab() = default;

    // From the raw token list as stored in checkpoints ("<bos>", "<eos>",
    // then single-character strings).
    static Vocab from_tokens(std::vector<std::string> tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool contains(char c) const { return char_to_id_[static_cast<unsigned char>(c)] >= 0; }
    TokenId id_of(char c) const;

    Sequence encode(std::string_view text) const;
    // Inverse of encode; reserved tokens are skipped.
    std::string decode(const Sequence& ids) const;

    bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::array<TokenId, 256> char_to_id_{};
};

// build_vocab: every distinct character of the corpus plus BOS/EOS.
Vocab build_vocab(std::string_view corpus);

// One hidden layer over the concatenated embeddings of the last k tokens:
//   logits = out_w' * tanh(hidden_w' * concat(embed[ctx]) + hidden_b) + out_b
// All parameters live in one flat buffer; named views are computed from the
// declared shape. Layout order: embedding (V x d), hidden_w ((k*d) x h),
// hidden_b (h), out_w (h x V), out_b (V), all row-major.
struct NeuralParams {
    int vocab_size = 0;
    int context_window = 0;  // k
    int dim = 0;             // d
    int hidden = 0;          // h
    std::vector<double> data;

    static NeuralParams zeros(int vocab_size, int context_window, int dim, int hidden);
    static NeuralParams random_init(int vocab_size, int context_window, int dim, int hidden,
                                    double stddev, uint64_t seed);

    size_t embedding_offset() const { return 0; }
    size_t hidden_w_offset() const { return size_t(vocab_size) * dim; }
    size_t hidden_b_offset() const { return hidden_w_offset() + size_t(context_window) * dim * hidden; }
    size_t out_w_offset() const { return hidden_b_offset() + hidden; }
    size_t out_b_offset() const { return out_w_offset() + size_t(hidden) * vocab_size; }
    size_t total_params() const { return out_b_offset() + vocab_size; }

    std::span<double> embedding() { return {data.data() + embedding_offset(), size_t(vocab_size) * dim}; }
    std::span<double> hidden_w() { return {data.data() + hidden_w_offset(), size_t(context_window) * dim * hidden}; }
    std::span<double> hidden_b() { return {data.data() + hidden_b_offset(), size_t(hidden)}; }
    std::span<double> out_w() { return {data.data() + out_w_offset(), size_t(hidden) * vocab_size}; }
    std::span<double> out_b() { return {data.data() + out_b_offset(), size_t(vocab_size)}; }
    std::span<const double> embedding() const { return {data.data() + embedding_offset(), size_t(vocab_size) * dim}; }
    std::span<const double> hidden_w() const { return {data.data() + hidden_w_offset(), size_t(context_window) * dim * hidden}; }
    std::span<const double> hidden_b() const { return {data.data() + hidden_b_offset(), size_t(hidden)}; }
    std::span<const double> out_w() const { return {data.data() + out_w_offset(), size_t(hidden) * vocab_size}; }
    std::span<const double> out_b() const { return {data.data() + out_b_offset(), size_t(vocab_size)}; }
};

// Count-based policy with additive smoothing:
//   p(v | ctx) = (count(ctx, v) + delta) / (total(ctx) + delta * V)
// Context tuples are the last (order - 1) tokens. Unseen contexts fall back
// to the uniform smoothed distribution.
struct NGramParams {
    int order = 2;           // context length is order - 1
    double smoothing = 0.5;  // delta > 0
    std::map<Sequence, std::vector<double>> counts;  // context -> per-token counts, length V
};

enum class ModelKind { ngram, neural };

// An immutable next-token log-probability function during inference.
// Mutation happens only inside the training loop.
struct LanguageModel {
    ModelKind kind = ModelKind::neural;
    Vocab vocab;
    int context_window = 1;  // trailing tokens conditioned on
    std::variant<NGramParams, NeuralParams> params;

    static LanguageModel make_neural(Vocab vocab, NeuralParams p);
    static LanguageModel make_ngram(Vocab vocab, NGramParams p);

    NeuralParams& neural() { return std::get<NeuralParams>(params); }
    const NeuralParams& neural() const { return std::get<NeuralParams>(params); }
    NGramParams& ngram() { return std::get<NGramParams>(params); }
    const NGramParams& ngram() const { return std::get<NGramParams>(params); }
};

// Scratch for one neural evaluation step; reused across steps so the hot
// loops do not allocate. Holds everything backprop needs.
struct NeuralTrace {
    std::vector<TokenId> ctx;     // padded context, length k
    std::vector<double> x;        // k*d concatenated embeddings
    std::vector<double> act;      // h, tanh activations
    std::vector<double> logits;   // V
    std::vector<double> logp;     // V
};

// Forward pass writing into `trace`. `context` is the full unpadded history;
// only the last k tokens are used, BOS-padded on the left.
void neural_forward(const LanguageModel& model, std::span<const TokenId> context, NeuralTrace& trace);

// Next-token log-probabilities over the whole vocabulary.
// exp of the result sums to 1 within 1e-12.
std::vector<double> logprobs(const LanguageModel& model, const Sequence& context);

// log p(response | prompt), factored over response tokens.
double sequence_logprob(const LanguageModel& model, const Sequence& prompt, const Sequence& response);

// Fit an n-gram model by counting over corpus lines (each line is wrapped in
// BOS-padding and a final EOS).
LanguageModel ngram_from_corpus(const Vocab& vocab, const std::vector<std::string>& lines,
                                int order, double smoothing);

}  // namespace tinyalign
