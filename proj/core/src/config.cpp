#include "esgpv/config.hpp"

#include "esgpv/common.hpp"

#include <yaml-cpp/yaml.h>

namespace esgpv {

namespace {

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
    if (node && node[key]) out = node[key].as<T>();
}

void read_encoder(const YAML::Node& node, EncoderConfig& c) {
    read(node, "backbone", c.backbone);
    read(node, "backbone_path", c.backbone_path);
    read(node, "max_len", c.max_len);
    read(node, "hidden_size", c.hidden_size);
    read(node, "num_layers", c.num_layers);
    read(node, "num_heads", c.num_heads);
    read(node, "ffn_size", c.ffn_size);
    read(node, "trainable_top_layers", c.trainable_top_layers);
    read(node, "vocab_limit", c.vocab_limit);
}

void read_loss(const YAML::Node& node, LossConfig& c) {
    if (node && node["kind"]) {
        const auto kind = node["kind"].as<std::string>();
        if (kind == "focal") c.kind = LossConfig::Kind::Focal;
        else if (kind == "cross-entropy") c.kind = LossConfig::Kind::CrossEntropy;
        else throw ValidationError("config: unknown loss kind '" + kind + "'");
    }
    read(node, "promise_weight", c.promise_weight);
    read(node, "evidence_weight", c.evidence_weight);
    read(node, "focal_gamma", c.focal_gamma);
    if (node && node["class_weights"]) {
        c.class_weights = node["class_weights"].as<std::vector<double>>();
    }
}

} // namespace

TrainOptions PipelineConfig::train_options(InputKind input) const {
    TrainOptions options;
    options.model = model;
    options.input = input;
    options.max_epochs = cv_max_epochs;
    options.patience = cv_patience;
    options.class_weighted = class_weighted;
    options.seed = seed;
    return options;
}

PipelineConfig default_config() { return {}; }

PipelineConfig load_config(const std::filesystem::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }

    PipelineConfig c;
    read(root, "seed", c.seed);
    if (root["encoder"]) read_encoder(root["encoder"], c.model.encoder);
    if (root["head"]) {
        read(root["head"], "mid_dim", c.model.head_mid_dim);
        read(root["head"], "dropout", c.model.head_dropout);
        read(root["head"], "pooler_bias", c.model.pooler_bias);
    }
    if (root["loss"]) read_loss(root["loss"], c.model.loss);

    if (const auto search = root["search"]) {
        read(search, "trials", c.n_trials);
        read(search, "lr_min", c.search.lr_min);
        read(search, "lr_max", c.search.lr_max);
        read(search, "wd_min", c.search.wd_min);
        read(search, "wd_max", c.search.wd_max);
        if (search["batch_sizes"]) {
            c.search.batch_sizes = search["batch_sizes"].as<std::vector<int>>();
        }
    }
    if (const auto cv = root["cv"]) {
        read(cv, "folds", c.cv_folds);
        read(cv, "patience", c.cv_patience);
        read(cv, "max_epochs", c.cv_max_epochs);
        read(cv, "class_weighted", c.class_weighted);
    }
    if (const auto mt = root["multitask"]) {
        read(mt, "epochs", c.multitask.epochs);
        read(mt, "lr", c.multitask.lr);
        read(mt, "weight_decay", c.multitask.weight_decay);
        read(mt, "warmup_fraction", c.multitask.warmup_fraction);
        read(mt, "grad_accum_steps", c.multitask.grad_accum_steps);
        read(mt, "micro_batch", c.multitask.micro_batch);
        read(mt, "train_fraction", c.multitask.train_fraction);
    }
    if (const auto tta = root["tta"]) {
        read(tta, "passes", c.tta.n_passes);
        read(tta, "word_dropout", c.tta.word_dropout_rate);
        read(tta, "vary_metadata", c.tta.vary_metadata);
        if (tta["source_tags"]) {
            c.tta.source_tag_synonyms = tta["source_tags"].as<std::vector<std::string>>();
        }
        if (tta["thresholds"]) {
            for (const auto task : {Subtask::Promise, Subtask::Evidence, Subtask::Clarity,
                                    Subtask::Timing}) {
                if (tta["thresholds"][subtask_name(task)]) {
                    c.tta.thresholds[task] =
                        tta["thresholds"][subtask_name(task)].as<double>();
                }
            }
        }
    }
    c.multitask.seed = c.seed;
    c.tta.seed = c.seed;
    return c;
}

} // namespace esgpv
