#include "tinyalign/corpus.hpp"

#include <random>

#include "tinyalign/util.hpp"

namespace tinyalign {

namespace {

// Lines walk a four-position word chain over a 12-character alphabet
// (a-h, x, z, space, period). Every position offers good variants built on
// one of the oracle's good bigrams, neutral variants on the reversed
// bigram, and noise variants carrying a bad character. A word's final
// character identifies its chain position (P1 ends a/b, P2 ends c/d, P3
// ends e/f, P4 ends g/h), so the next position and the end of the line are
// always inferable from a short trailing context. Lines close with a
// period after position 3 or 4.
//
// Neutral variants outweigh good ones everywhere, keeping base models
// mediocre under the oracle. The good-vs-neutral log-probability margin is
// staggered across positions (roughly 0.2, 0.45, 0.7 and 1.0 nats), so a
// partially aligned model flips the easy positions outright while the
// harder ones stay inside the band where the contrastive term, not the
// raw probability, decides the pick. Each class also branches into
// several words so decision contexts flip one by one.
struct PositionWords {
    const char* good[2];
    const char* neutral[3];
    const char* noise[2];
};

// All words are exactly three characters, so any two picks from the same
// class score identically and length never confounds the quality signal.
const PositionWords kChain[4] = {
    {{"aab", "abb"}, {"bba", "baa", "bbb"}, {"xba", "xaa"}},
    {{"ccd", "cdd"}, {"ddc", "dcc", "ddd"}, {"zdc", "zcc"}},
    {{"eef", "eff"}, {"ffe", "fee", "fff"}, {"xfe", "xee"}},
    {{"ggh", "ghh"}, {"hhg", "hgg", "hhh"}, {"zhg", "zgg"}},
};

const double kGoodProb[4] = {0.32, 0.28, 0.23, 0.18};
const double kNoiseProb = 0.15;

const char* pick_word(int position, std::mt19937_64& rng) {
    const PositionWords& w = kChain[position];
    double roll = uniform01(rng);
    if (roll < kGoodProb[position]) return w.good[uniform01(rng) < 0.6 ? 0 : 1];
    if (roll < 1.0 - kNoiseProb) {
        double inner = uniform01(rng);
        return w.neutral[inner < 0.45 ? 0 : (inner < 0.8 ? 1 : 2)];
    }
    return w.noise[uniform01(rng) < 0.7 ? 0 : 1];
}

// Every line visits all four positions, so the period and EOS are fully
// determined once the last word ends and response lengths stay flat; the
// quality signal lives entirely in the word-class choices.
std::string make_line(std::mt19937_64& rng) {
    std::string line;
    for (int position = 0; position < 4; ++position) {
        if (position > 0) line += ' ';
        line += pick_word(position, rng);
    }
    line += '.';
    return line;
}

}  // namespace

std::vector<std::string> make_corpus(uint64_t seed, int n_lines) {
    std::mt19937_64 rng(derive_seed(seed, 0xc0d1ce5ull));
    std::vector<std::string> lines;
    lines.reserve(static_cast<size_t>(n_lines));
    for (int i = 0; i < n_lines; ++i) lines.push_back(make_line(rng));
    return lines;
}

std::vector<std::string> make_prompts(uint64_t seed, int n_prompts) {
    std::mt19937_64 rng(derive_seed(seed, 0x9a0b75ull));
    std::vector<std::string> prompts;
    prompts.reserve(static_cast<size_t>(n_prompts));
    for (int i = 0; i < n_prompts; ++i) {
        std::string line = make_line(rng);
        size_t len = 2 + static_cast<size_t>(rng() % 5);  // 2..6 characters
        if (len > line.size()) len = line.size();
        prompts.push_back(line.substr(0, len));
    }
    return prompts;
}

std::vector<Sequence> encode_prompts(const Vocab& vocab, const std::vector<std::string>& prompts) {
    std::vector<Sequence> out;
    out.reserve(prompts.size());
    for (const std::string& p : prompts) out.push_back(vocab.encode(p));
    return out;
}

Sequence to_response(const Vocab& vocab, const std::string& text) {
    Sequence ids = vocab.encode(text);
    ids.push_back(Vocab::kEos);
    return ids;
}

}  // namespace tinyalign
