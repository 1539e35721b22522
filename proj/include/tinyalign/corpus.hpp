#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tinyalign/model.hpp"

namespace tinyalign {

// Synthetic task generator. Lines are short "sentences" over a 12-character
// alphabet (a-h, the noise characters x/z, space, and a closing period),
// biased toward the oracle's good bigrams but far from saturating it, so
// base models are mediocre and alignment has measurable headroom.
std::vector<std::string> make_corpus(uint64_t seed, int n_lines);

// Short sentence prefixes used as prompts; draw train/eval sets with
// disjoint seeds.
std::vector<std::string> make_prompts(uint64_t seed, int n_prompts);

std::vector<Sequence> encode_prompts(const Vocab& vocab, const std::vector<std::string>& prompts);

// response sequence for a text: encoded characters plus a final EOS.
Sequence to_response(const Vocab& vocab, const std::string& text);

}  // namespace tinyalign
