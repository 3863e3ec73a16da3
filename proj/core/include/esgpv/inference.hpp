#pragma once

#include "esgpv/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace esgpv {

struct TTAConfig {
    int n_passes = 3;
    double word_dropout_rate = 0.10;
    bool vary_metadata = true;
    std::map<Subtask, double> thresholds; // absent tasks default to 0.5
    uint64_t seed = 42;
    std::vector<std::string> source_tag_synonyms = {"ESG REPORT", "SUSTAINABILITY REPORT"};

    double threshold_for(Subtask task) const;
    void validate() const;
};

// Stochastic word dropout outside the protected prefix (the "[PAGE p]
// [TAG] " metadata block and any featurizer tag block). Pass 0 is always
// the identity; later passes rotate the source tag through the synonym
// list when vary_metadata is set. Deterministic in (text, seed, pass).
std::string augment_text(const std::string& enriched_text, const TTAConfig& config,
                         int pass_index);

struct TaskPrediction {
    Eigen::VectorXd mean_distribution; // arithmetic mean over passes
    std::vector<Eigen::VectorXd> pass_distributions;
    int label_index = 0;
    double probability = 0.0;              // binary: positive prob; else argmax prob
    std::vector<double> per_pass_probability;
};

struct Prediction {
    std::string record_id;
    std::map<Subtask, TaskPrediction> tasks;
};

// n_passes augmented forwards, probabilities averaged, binary labels
// thresholded with >= (a probability of exactly 0.5 maps to Yes).
Prediction predict_tta(const PromiseRecord& record, TextClassifier& model,
                       const TTAConfig& config);

// Single un-augmented forward; the degenerate-TTA reference path.
Prediction plain_predict(const PromiseRecord& record, TextClassifier& model,
                         const TTAConfig& config = {});

// Grid search over [0.05, 0.95] in 0.01 steps maximizing binary F1.
// Ties resolve toward 0.5, then toward the lower threshold.
double calibrate_threshold(const std::vector<double>& probabilities,
                           const std::vector<int>& gold);

std::string prediction_to_json(const Prediction& prediction);
Prediction prediction_from_json(const std::string& line);

std::vector<Prediction> load_predictions_jsonl(const std::filesystem::path& path);
void save_predictions_jsonl(const std::filesystem::path& path,
                            const std::vector<Prediction>& predictions);

// Unions task entries by record id; a task appearing twice for one id is an
// error.
std::vector<Prediction> merge_predictions(const std::vector<std::vector<Prediction>>& sets);

} // namespace esgpv
