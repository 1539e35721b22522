#include "tinyalign/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace tinyalign {

OracleSpec OracleSpec::defaults() {
    OracleSpec spec;
    spec.good_bigrams = {"ab", "cd", "ef", "gh"};
    spec.bad_chars = {'x', 'z'};
    spec.min_len = 6;
    spec.max_len = 24;
    return spec;
}

void OracleSpec::validate() const {
    if (min_len > max_len) throw std::invalid_argument("length window inverted");
    for (const std::string& bg : good_bigrams) {
        if (bg.size() != 2) throw std::invalid_argument("good bigrams must have length 2");
        if (bad_chars.count(bg[0]) || bad_chars.count(bg[1]))
            throw std::invalid_argument("good bigrams and bad chars must be disjoint");
    }
}

double oracle_score_text(const OracleSpec& spec, const std::string& text) {
    if (text.empty()) return 0.0;
    const int len = static_cast<int>(text.size());
    double good = 0.0;
    for (size_t i = 0; i + 1 < text.size(); ++i)
        if (spec.good_bigrams.count(text.substr(i, 2))) good += OracleSpec::kGoodWeight;
    double bad = 0.0;
    for (char c : text)
        if (spec.bad_chars.count(c)) bad += OracleSpec::kBadWeight;
    double score = (good - bad) / static_cast<double>(std::max(1, len));
    if (len >= spec.min_len && len <= spec.max_len) score += OracleSpec::kLengthBonus;
    return score;
}

double oracle_score(const OracleSpec& spec, const Vocab& vocab, const Sequence& response) {
    return oracle_score_text(spec, vocab.decode(response));
}

}  // namespace tinyalign
