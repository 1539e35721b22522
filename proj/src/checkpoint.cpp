#include "tinyalign/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tinyalign {

using nlohmann::json;

namespace {

json params_to_json(const NeuralParams& p) {
    json dims{{"vocab_size", p.vocab_size},
              {"context_window", p.context_window},
              {"dim", p.dim},
              {"hidden", p.hidden}};
    auto slice = [&](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    json params{{"embedding", slice(p.embedding())},
                {"hidden_weight", slice(p.hidden_w())},
                {"hidden_bias", slice(p.hidden_b())},
                {"output_weight", slice(p.out_w())},
                {"output_bias", slice(p.out_b())}};
    return json{{"dims", dims}, {"params", params}};
}

json params_to_json(const NGramParams& p, int vocab_size) {
    json dims{{"order", p.order}, {"vocab_size", vocab_size}};
    // Rows of [ctx..., token, count], flattened; std::map iteration keeps the
    // encoding deterministic.
    std::vector<double> rows;
    for (const auto& [ctx, counts] : p.counts) {
        for (size_t t = 0; t < counts.size(); ++t) {
            if (counts[t] == 0.0) continue;
            for (TokenId c : ctx) rows.push_back(static_cast<double>(c));
            rows.push_back(static_cast<double>(t));
            rows.push_back(counts[t]);
        }
    }
    json params{{"counts", rows}, {"smoothing", std::vector<double>{p.smoothing}}};
    return json{{"dims", dims}, {"params", params}};
}

}  // namespace

std::string checkpoint_to_string(const LanguageModel& model) {
    json doc;
    doc["format_version"] = 1;
    doc["kind"] = model.kind == ModelKind::neural ? "neural" : "ngram";
    doc["vocab"] = model.vocab.tokens();
    doc["context_window"] = model.context_window;
    json body = model.kind == ModelKind::neural
                    ? params_to_json(model.neural())
                    : params_to_json(model.ngram(), model.vocab.size());
    doc["dims"] = body["dims"];
    doc["params"] = body["params"];
    return doc.dump(2) + "\n";
}

LanguageModel checkpoint_from_string(const std::string& text) {
    json doc = json::parse(text);
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint format version");

    Vocab vocab = Vocab::from_tokens(doc.at("vocab").get<std::vector<std::string>>());
    std::string kind = doc.at("kind").get<std::string>();
    const json& dims = doc.at("dims");
    const json& params = doc.at("params");

    if (kind == "neural") {
        NeuralParams p = NeuralParams::zeros(dims.at("vocab_size").get<int>(),
                                             dims.at("context_window").get<int>(),
                                             dims.at("dim").get<int>(), dims.at("hidden").get<int>());
        auto fill = [&](const char* name, std::span<double> dst) {
            std::vector<double> v = params.at(name).get<std::vector<double>>();
            if (v.size() != dst.size()) throw std::runtime_error("checkpoint array size mismatch");
            std::copy(v.begin(), v.end(), dst.begin());
        };
        fill("embedding", p.embedding());
        fill("hidden_weight", p.hidden_w());
        fill("hidden_bias", p.hidden_b());
        fill("output_weight", p.out_w());
        fill("output_bias", p.out_b());
        return LanguageModel::make_neural(std::move(vocab), std::move(p));
    }
    if (kind == "ngram") {
        NGramParams p;
        p.order = dims.at("order").get<int>();
        p.smoothing = params.at("smoothing").get<std::vector<double>>().at(0);
        std::vector<double> rows = params.at("counts").get<std::vector<double>>();
        const size_t stride = static_cast<size_t>(p.order - 1) + 2;
        if (rows.size() % stride != 0) throw std::runtime_error("checkpoint count table malformed");
        const int v = vocab.size();
        for (size_t i = 0; i < rows.size(); i += stride) {
            Sequence ctx;
            for (size_t j = 0; j < static_cast<size_t>(p.order - 1); ++j)
                ctx.push_back(static_cast<TokenId>(rows[i + j]));
            TokenId token = static_cast<TokenId>(rows[i + stride - 2]);
            double count = rows[i + stride - 1];
            auto [it, inserted] = p.counts.try_emplace(std::move(ctx));
            if (inserted) it->second.assign(static_cast<size_t>(v), 0.0);
            it->second.at(static_cast<size_t>(token)) = count;
        }
        return LanguageModel::make_ngram(std::move(vocab), std::move(p));
    }
    throw std::runtime_error("unknown checkpoint kind: " + kind);
}

void save_checkpoint(const LanguageModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << checkpoint_to_string(model);
}

LanguageModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_string(text);
}

}  // namespace tinyalign
