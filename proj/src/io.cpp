#include "tinyalign/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tinyalign {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return in;
}

}  // namespace

void write_generation_batch(const std::string& path, const std::vector<GenerationRecord>& records) {
    std::ofstream out = open_out(path);
    for (const GenerationRecord& r : records) {
        json line{{"prompt", r.prompt},
                  {"response", r.response},
                  {"alpha", r.alpha},
                  {"lambda", r.lambda},
                  {"implicit_reward", r.implicit_reward},
                  {"explicit_reward", r.explicit_reward},
                  {"length", r.length}};
        out << line.dump() << "\n";
    }
}

std::vector<GenerationRecord> read_generation_batch(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<GenerationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        records.push_back({j.at("prompt").get<std::string>(), j.at("response").get<std::string>(),
                           j.at("alpha").get<double>(), j.at("lambda").get<double>(),
                           j.at("implicit_reward").get<double>(), j.at("explicit_reward").get<double>(),
                           j.at("length").get<int>()});
    }
    return records;
}

void write_preference_file(const std::string& path, const std::vector<PreferenceRecord>& records) {
    std::ofstream out = open_out(path);
    for (const PreferenceRecord& r : records) {
        json line{{"prompt", r.prompt},
                  {"chosen", r.chosen},
                  {"rejected", r.rejected},
                  {"score_chosen", r.score_chosen},
                  {"score_rejected", r.score_rejected}};
        out << line.dump() << "\n";
    }
}

std::vector<PreferenceRecord> read_preference_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<PreferenceRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        records.push_back({j.at("prompt").get<std::string>(), j.at("chosen").get<std::string>(),
                           j.at("rejected").get<std::string>(), j.at("score_chosen").get<double>(),
                           j.at("score_rejected").get<double>()});
    }
    return records;
}

void write_text_file(const std::string& path, const std::string& content) {
    open_out(path) << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out = open_out(path);
    for (const std::string& l : lines) out << l << "\n";
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace tinyalign
