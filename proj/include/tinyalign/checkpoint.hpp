#pragma once

#include <string>

#include "tinyalign/model.hpp"

namespace tinyalign {

// Single-document model checkpoint. Decimal float encoding uses the shortest
// round-trip representation, so save followed by load reproduces
// log-probabilities bit-identically at double precision.
void save_checkpoint(const LanguageModel& model, const std::string& path);
LanguageModel load_checkpoint(const std::string& path);

std::string checkpoint_to_string(const LanguageModel& model);
LanguageModel checkpoint_from_string(const std::string& text);

}  // namespace tinyalign
