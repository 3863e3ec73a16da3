#include "esgpv/inference.hpp"

#include "esgpv/common.hpp"
#include "esgpv/featurizer.hpp"
#include "esgpv/metrics.hpp"
#include "esgpv/rng.hpp"
#include "esgpv/textutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace esgpv {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// "[PAGE p] [TAG] " at position 0.
struct MetaBlock {
    size_t length = 0;     // bytes of the whole block including trailing space
    std::string page;      // contents between "[PAGE " and "]"
    std::string source_tag;
};

std::optional<MetaBlock> parse_meta_block(const std::string& text) {
    constexpr std::string_view page_open = "[PAGE ";
    if (text.rfind(page_open.data(), 0) != 0) return std::nullopt;
    const size_t page_end = text.find(']', page_open.size());
    if (page_end == std::string::npos) return std::nullopt;
    if (text.compare(page_end, 3, "] [") != 0) return std::nullopt;
    const size_t tag_start = page_end + 3;
    const size_t tag_end = text.find(']', tag_start);
    if (tag_end == std::string::npos) return std::nullopt;
    if (tag_end + 1 >= text.size() || text[tag_end + 1] != ' ') return std::nullopt;
    MetaBlock block;
    block.length = tag_end + 2;
    block.page = text.substr(page_open.size(), page_end - page_open.size());
    block.source_tag = text.substr(tag_start, tag_end - tag_start);
    return block;
}

bool has_alnum(const std::string& token) {
    return std::any_of(token.begin(), token.end(), [](unsigned char c) {
        return std::isalnum(c) != 0 || c >= 0x80;
    });
}

TaskPrediction finalize_task(Subtask task, std::vector<Eigen::VectorXd> pass_dists,
                             double threshold) {
    TaskPrediction out;
    out.pass_distributions = std::move(pass_dists);
    const auto n_passes = static_cast<double>(out.pass_distributions.size());
    out.mean_distribution = Eigen::VectorXd::Zero(out.pass_distributions.front().size());
    for (const auto& d : out.pass_distributions) out.mean_distribution += d;
    out.mean_distribution /= n_passes;

    if (class_count(task) == 2) {
        out.probability = out.mean_distribution(1);
        out.label_index = out.probability >= threshold ? 1 : 0;
        for (const auto& d : out.pass_distributions) out.per_pass_probability.push_back(d(1));
    } else {
        Eigen::Index argmax = 0;
        out.mean_distribution.maxCoeff(&argmax);
        out.label_index = static_cast<int>(argmax);
        out.probability = out.mean_distribution(argmax);
        for (const auto& d : out.pass_distributions) {
            out.per_pass_probability.push_back(d(argmax));
        }
    }
    return out;
}

} // namespace

double TTAConfig::threshold_for(Subtask task) const {
    auto it = thresholds.find(task);
    return it == thresholds.end() ? 0.5 : it->second;
}

void TTAConfig::validate() const {
    if (n_passes < 1) throw ValidationError("tta: n_passes must be >= 1");
    if (word_dropout_rate < 0.0 || word_dropout_rate >= 1.0) {
        throw ValidationError("tta: word_dropout_rate must be in [0,1)");
    }
}

std::string augment_text(const std::string& enriched_text, const TTAConfig& config,
                         int pass_index) {
    config.validate();
    if (pass_index == 0) return enriched_text; // anchor pass

    std::string prefix;
    std::string rest = enriched_text;

    const auto meta = parse_meta_block(enriched_text);
    if (meta) {
        std::string tag = meta->source_tag;
        if (config.vary_metadata && !config.source_tag_synonyms.empty()) {
            tag = config.source_tag_synonyms[static_cast<size_t>(pass_index - 1) %
                                             config.source_tag_synonyms.size()];
        }
        prefix = "[PAGE " + meta->page + "] [" + tag + "] ";
        rest = enriched_text.substr(meta->length);
    }
    if (const auto tag_block = detect_tag_prefix(rest)) {
        prefix += rest.substr(0, tag_block->second);
        rest = rest.substr(tag_block->second);
    }

    if (config.word_dropout_rate == 0.0) return prefix + rest;

    DetRng rng(mix_seed(config.seed, fnv1a64(enriched_text),
                        static_cast<uint64_t>(pass_index)));
    std::string kept;
    std::string token;
    auto flush = [&](bool drop) {
        if (token.empty()) return;
        if (!drop) {
            if (!kept.empty()) kept.push_back(' ');
            kept += token;
        }
        token.clear();
    };
    for (char c : rest) {
        if (c == ' ') {
            flush(has_alnum(token) && rng.bernoulli(config.word_dropout_rate));
        } else {
            token.push_back(c);
        }
    }
    flush(has_alnum(token) && rng.bernoulli(config.word_dropout_rate));

    std::string out = prefix + kept;
    if (trim(out).empty()) return enriched_text; // everything dropped: keep the original
    return out;
}

Prediction predict_tta(const PromiseRecord& record, TextClassifier& model,
                       const TTAConfig& config) {
    config.validate();
    const auto tasks = model.tasks();
    const std::string base_text =
        transform_text(model.input_kind(), tasks.front(), record);

    std::map<Subtask, std::vector<Eigen::VectorXd>> pass_dists;
    for (int pass = 0; pass < config.n_passes; ++pass) {
        const std::string text = augment_text(base_text, config, pass);
        auto dists = model.predict(text);
        for (const auto& [task, dist] : dists) pass_dists[task].push_back(dist);
    }

    Prediction out;
    out.record_id = record.id;
    for (auto& [task, dists] : pass_dists) {
        out.tasks[task] = finalize_task(task, std::move(dists), config.threshold_for(task));
    }
    return out;
}

Prediction plain_predict(const PromiseRecord& record, TextClassifier& model,
                         const TTAConfig& config) {
    const auto tasks = model.tasks();
    const std::string base_text =
        transform_text(model.input_kind(), tasks.front(), record);
    auto dists = model.predict(base_text);

    Prediction out;
    out.record_id = record.id;
    for (auto& [task, dist] : dists) {
        out.tasks[task] = finalize_task(task, {dist}, config.threshold_for(task));
    }
    return out;
}

double calibrate_threshold(const std::vector<double>& probabilities,
                           const std::vector<int>& gold) {
    if (probabilities.size() != gold.size() || probabilities.empty()) {
        throw ValidationError("calibrate_threshold: aligned non-empty inputs required");
    }
    const bool has_pos = std::count(gold.begin(), gold.end(), 1) > 0;
    const bool has_neg = std::count(gold.begin(), gold.end(), 0) > 0;
    if (!has_pos || !has_neg) {
        throw ValidationError("calibrate_threshold: validation set must contain both classes");
    }

    double best_t = 0.5;
    double best_f1 = -1.0;
    for (int i = 5; i <= 95; ++i) {
        const double t = static_cast<double>(i) / 100.0;
        std::vector<int> preds(probabilities.size());
        for (size_t j = 0; j < probabilities.size(); ++j) {
            preds[j] = probabilities[j] >= t ? 1 : 0;
        }
        const double f1 = f1_score(preds, gold, Averaging::Binary, 2);
        const bool better =
            f1 > best_f1 ||
            (f1 == best_f1 && (std::abs(t - 0.5) < std::abs(best_t - 0.5) ||
                               (std::abs(t - 0.5) == std::abs(best_t - 0.5) && t < best_t)));
        if (better) {
            best_f1 = f1;
            best_t = t;
        }
    }
    return best_t;
}

std::string prediction_to_json(const Prediction& prediction) {
    ordered_json j;
    j["id"] = prediction.record_id;
    ordered_json tasks;
    for (const auto& [task, tp] : prediction.tasks) {
        ordered_json t;
        t["label"] = class_name(task, tp.label_index);
        t["probability"] = tp.probability;
        t["per_pass"] = tp.per_pass_probability;
        t["distribution"] = std::vector<double>(tp.mean_distribution.data(),
                                                tp.mean_distribution.data() +
                                                    tp.mean_distribution.size());
        ordered_json pass_dists = ordered_json::array();
        for (const auto& d : tp.pass_distributions) {
            pass_dists.push_back(std::vector<double>(d.data(), d.data() + d.size()));
        }
        t["per_pass_distributions"] = std::move(pass_dists);
        tasks[subtask_name(task)] = std::move(t);
    }
    j["tasks"] = std::move(tasks);
    return j.dump();
}

Prediction prediction_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError("invalid prediction line: " + std::string(e.what()));
    }
    Prediction out;
    out.record_id = j.at("id").get<std::string>();
    for (const auto task : {Subtask::Promise, Subtask::Evidence, Subtask::Clarity,
                            Subtask::Timing}) {
        const auto key = subtask_name(task);
        if (!j.at("tasks").contains(key)) continue;
        const auto& t = j["tasks"][key];
        TaskPrediction tp;
        const auto label = parse_class(task, t.at("label").get<std::string>());
        if (!label) throw ValidationError("prediction for '" + out.record_id +
                                          "': bad label for " + key);
        tp.label_index = *label;
        tp.probability = t.at("probability").get<double>();
        tp.per_pass_probability = t.at("per_pass").get<std::vector<double>>();
        const auto dist = t.at("distribution").get<std::vector<double>>();
        tp.mean_distribution =
            Eigen::Map<const Eigen::VectorXd>(dist.data(),
                                              static_cast<Eigen::Index>(dist.size()));
        for (const auto& pd : t.at("per_pass_distributions")) {
            const auto v = pd.get<std::vector<double>>();
            tp.pass_distributions.push_back(Eigen::Map<const Eigen::VectorXd>(
                v.data(), static_cast<Eigen::Index>(v.size())));
        }
        out.tasks[task] = std::move(tp);
    }
    return out;
}

std::vector<Prediction> load_predictions_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open predictions file: " + path.string());
    std::vector<Prediction> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(prediction_from_json(line));
    }
    return out;
}

void save_predictions_jsonl(const std::filesystem::path& path,
                            const std::vector<Prediction>& predictions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    for (const auto& p : predictions) out << prediction_to_json(p) << "\n";
}

std::vector<Prediction> merge_predictions(const std::vector<std::vector<Prediction>>& sets) {
    std::map<std::string, Prediction> merged;
    std::vector<std::string> order;
    for (const auto& set : sets) {
        for (const auto& p : set) {
            auto [it, inserted] = merged.try_emplace(p.record_id, Prediction{p.record_id, {}});
            if (inserted) order.push_back(p.record_id);
            for (const auto& [task, tp] : p.tasks) {
                if (!it->second.tasks.emplace(task, tp).second) {
                    throw ValidationError("duplicate " + std::string(subtask_name(task)) +
                                          " prediction for record '" + p.record_id + "'");
                }
            }
        }
    }
    std::vector<Prediction> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(std::move(merged[id]));
    return out;
}

} // namespace esgpv
