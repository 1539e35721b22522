#pragma once

#include <set>
#include <string>

#include "tinyalign/model.hpp"

namespace tinyalign {

// Synthetic explicit-reward oracle standing in for an external judge.
// score = (good-bigram hits - 2 * bad-char hits) / max(1, length)
//         + 0.5 if length falls inside [min_len, max_len].
// Bigram hits count overlapping occurrences in the decoded response text.
struct OracleSpec {
    std::set<std::string> good_bigrams;
    std::set<char> bad_chars;
    int min_len = 6;
    int max_len = 24;

    static constexpr double kGoodWeight = 1.0;
    static constexpr double kBadWeight = 2.0;
    static constexpr double kLengthBonus = 0.5;

    static OracleSpec defaults();
    void validate() const;
};

double oracle_score(const OracleSpec& spec, const Vocab& vocab, const Sequence& response);
double oracle_score_text(const OracleSpec& spec, const std::string& text);

}  // namespace tinyalign
