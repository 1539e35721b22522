#pragma once

#include <string>
#include <vector>

namespace tinyalign {

// Generation batch: one JSON record per line.
struct GenerationRecord {
    std::string prompt;
    std::string response;
    double alpha = 1.0;
    double lambda = 0.0;
    double implicit_reward = 0.0;
    double explicit_reward = 0.0;
    int length = 0;
};

// Preference dataset: one JSON record per line, UTF-8.
struct PreferenceRecord {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    double score_chosen = 0.0;
    double score_rejected = 0.0;
};

void write_generation_batch(const std::string& path, const std::vector<GenerationRecord>& records);
std::vector<GenerationRecord> read_generation_batch(const std::string& path);

void write_preference_file(const std::string& path, const std::vector<PreferenceRecord>& records);
std::vector<PreferenceRecord> read_preference_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace tinyalign
