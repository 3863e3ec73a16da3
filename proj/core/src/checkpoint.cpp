#include "esgpv/checkpoint.hpp"

#include "esgpv/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>

namespace esgpv {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'E', 'P', 'V', 'B'};
constexpr uint32_t kBlobVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

ordered_json encoder_to_json(const EncoderConfig& c) {
    ordered_json j;
    j["backbone"] = c.backbone;
    if (!c.backbone_path.empty()) j["backbone_path"] = c.backbone_path;
    j["max_len"] = c.max_len;
    j["hidden_size"] = c.hidden_size;
    j["num_layers"] = c.num_layers;
    j["num_heads"] = c.num_heads;
    j["ffn_size"] = c.ffn_size;
    j["trainable_top_layers"] = c.trainable_top_layers;
    j["vocab_limit"] = c.vocab_limit;
    return j;
}

EncoderConfig encoder_from_json(const json& j) {
    EncoderConfig c;
    c.backbone = j.value("backbone", c.backbone);
    c.backbone_path = j.value("backbone_path", c.backbone_path);
    c.max_len = j.value("max_len", c.max_len);
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.ffn_size = j.value("ffn_size", c.ffn_size);
    c.trainable_top_layers = j.value("trainable_top_layers", c.trainable_top_layers);
    c.vocab_limit = j.value("vocab_limit", c.vocab_limit);
    return c;
}

ordered_json loss_to_json(const LossConfig& c) {
    ordered_json j;
    j["kind"] = c.kind == LossConfig::Kind::Focal ? "focal" : "cross-entropy";
    j["promise_weight"] = c.promise_weight;
    j["evidence_weight"] = c.evidence_weight;
    j["focal_gamma"] = c.focal_gamma;
    if (c.class_weights) j["class_weights"] = *c.class_weights;
    return j;
}

LossConfig loss_from_json(const json& j) {
    LossConfig c;
    const std::string kind = j.value("kind", "cross-entropy");
    if (kind == "focal") c.kind = LossConfig::Kind::Focal;
    else if (kind == "cross-entropy") c.kind = LossConfig::Kind::CrossEntropy;
    else throw ValidationError("unknown loss kind '" + kind + "'");
    c.promise_weight = j.value("promise_weight", c.promise_weight);
    c.evidence_weight = j.value("evidence_weight", c.evidence_weight);
    c.focal_gamma = j.value("focal_gamma", c.focal_gamma);
    if (j.contains("class_weights")) {
        c.class_weights = j.at("class_weights").get<std::vector<double>>();
    }
    return c;
}

} // namespace

void write_param_blob(const std::filesystem::path& file,
                      const std::map<std::string, ag::Mat>& tensors) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + file.string());
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kBlobVersion);
    write_u32(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [key, mat] : tensors) {
        write_u32(out, static_cast<uint32_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
        write_u32(out, static_cast<uint32_t>(mat.rows()));
        write_u32(out, static_cast<uint32_t>(mat.cols()));
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            for (Eigen::Index c = 0; c < mat.cols(); ++c) {
                const double v = mat(r, c);
                out.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
        }
    }
}

std::map<std::string, ag::Mat> read_param_blob(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + file.string());
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ValidationError("not a parameter blob: " + file.string());
    }
    const uint32_t version = read_u32(in);
    if (version != kBlobVersion) {
        throw ValidationError("unsupported parameter blob version " + std::to_string(version));
    }
    const uint32_t count = read_u32(in);
    std::map<std::string, ag::Mat> tensors;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t key_len = read_u32(in);
        std::string key(key_len, '\0');
        in.read(key.data(), key_len);
        const uint32_t rows = read_u32(in);
        const uint32_t cols = read_u32(in);
        ag::Mat mat(rows, cols);
        for (uint32_t r = 0; r < rows; ++r) {
            for (uint32_t c = 0; c < cols; ++c) {
                double v = 0.0;
                in.read(reinterpret_cast<char*>(&v), sizeof(v));
                mat(r, c) = v;
            }
        }
        if (!in) throw ValidationError("truncated parameter blob: " + file.string());
        tensors[key] = std::move(mat);
    }
    return tensors;
}

void save_checkpoint(const std::filesystem::path& dir, const CheckpointManifest& manifest,
                     const ag::ParamStore& params) {
    std::filesystem::create_directories(dir);

    ordered_json j;
    j["format_version"] = manifest.format_version;
    j["kind"] = manifest.kind;
    if (manifest.subtask) j["subtask"] = static_cast<int>(*manifest.subtask);
    j["input"] = manifest.input;
    j["encoder"] = encoder_to_json(manifest.model.encoder);
    j["head"] = {{"mid_dim", manifest.model.head_mid_dim},
                 {"dropout", manifest.model.head_dropout},
                 {"pooler_bias", manifest.model.pooler_bias}};
    j["loss"] = loss_to_json(manifest.model.loss);
    j["seed"] = manifest.seed;
    j["metrics"] = manifest.metrics;
    j["vocab"] = manifest.vocab;

    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw ValidationError("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";

    write_param_blob(dir / "params.bin", params.snapshot());
}

void save_checkpoint(const std::filesystem::path& dir, TextClassifier& model,
                     const std::map<std::string, double>& metrics) {
    CheckpointManifest manifest;
    const auto model_tasks = model.tasks();
    manifest.kind = model_tasks.size() > 1 ? "combined" : "single";
    if (model_tasks.size() == 1) manifest.subtask = model_tasks.front();
    manifest.input = to_string(model.input_kind());
    manifest.model = model.config();
    manifest.seed = model.init_seed();
    manifest.vocab = model.vocab().tokens();
    manifest.metrics = metrics;
    save_checkpoint(dir, manifest, model.params());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("no checkpoint manifest at " + manifest_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("invalid manifest: " + std::string(e.what()));
    }

    CheckpointManifest manifest;
    manifest.format_version = j.value("format_version", 1);
    manifest.kind = j.at("kind").get<std::string>();
    if (j.contains("subtask")) {
        const auto task = parse_subtask(j.at("subtask").get<int>());
        if (!task) throw ValidationError("manifest subtask out of range");
        manifest.subtask = task;
    }
    manifest.input = j.value("input", "raw");
    manifest.model.encoder = encoder_from_json(j.at("encoder"));
    if (j.contains("head")) {
        manifest.model.head_mid_dim = j["head"].value("mid_dim", 0);
        manifest.model.head_dropout = j["head"].value("dropout", 0.1);
        manifest.model.pooler_bias = j["head"].value("pooler_bias", false);
    }
    if (j.contains("loss")) manifest.model.loss = loss_from_json(j["loss"]);
    manifest.seed = j.value("seed", 0ULL);
    manifest.vocab = j.at("vocab").get<std::vector<std::string>>();
    if (j.contains("metrics")) {
        manifest.metrics = j.at("metrics").get<std::map<std::string, double>>();
    }

    auto vocab = Vocabulary::from_tokens(manifest.vocab);
    std::unique_ptr<TextClassifier> model;
    if (manifest.kind == "combined") {
        model = std::make_unique<MultiTaskModel>(manifest.model, std::move(vocab),
                                                 manifest.seed);
    } else if (manifest.kind == "single") {
        if (!manifest.subtask) throw ValidationError("single checkpoint without subtask");
        model = std::make_unique<SingleTaskModel>(manifest.model, *manifest.subtask,
                                                  parse_input_kind(manifest.input),
                                                  std::move(vocab), manifest.seed);
    } else {
        throw ValidationError("unknown checkpoint kind '" + manifest.kind + "'");
    }

    const auto tensors = read_param_blob(dir / "params.bin");
    model->params().restore(tensors);
    return {std::move(manifest), std::move(model)};
}

} // namespace esgpv
