#pragma once

#include "esgpv/corpus.hpp"
#include "esgpv/model.hpp"
#include "esgpv/optim.hpp"
#include "esgpv/tpe.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace esgpv {

// Model 3 training protocol parameters.
struct TrainSchedule {
    int epochs = 5;
    double lr = 1e-5;
    double weight_decay = 0.01;
    double warmup_fraction = 0.10;
    int grad_accum_steps = 16;
    int micro_batch = 1;
    std::optional<int> early_stop_patience;
    double train_fraction = 0.9;
    uint64_t seed = 42;

    void validate() const;
};

// Shared knobs for the Model 1-2 paths.
struct TrainOptions {
    ModelConfig model;
    InputKind input = InputKind::Raw;
    int max_epochs = 8;  // CV epoch cap
    int patience = 2;    // CV early stopping
    bool class_weighted = true; // inverse-frequency CE weights
    uint64_t seed = 42;
};

// Patience arithmetic, tested in isolation. Epochs are 1-based; record()
// returns true when training should stop after the recorded epoch.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}
    bool record(double validation_loss);
    double best_loss() const { return best_; }
    int best_epoch() const { return best_epoch_; }
    int epochs_seen() const { return epoch_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

// Earliest strict maximum of a score sequence.
class BestTracker {
public:
    bool record(double score); // true on a new strict best
    int best_epoch() const { return best_epoch_; }
    double best_score() const { return best_; }

private:
    int epoch_ = 0;
    int best_epoch_ = 0;
    double best_ = -std::numeric_limits<double>::infinity();
};

// Lower median of per-fold best epochs.
int median_epoch(std::vector<int> epochs);

// Inverse-frequency class weights, normalized to mean 1.
std::vector<double> inverse_frequency_weights(const std::vector<int>& labels, int n_classes);

// One hyperparameter trial: k-fold CV with early stopping; the score is
// the best validation loss per fold, averaged.
TrialResult run_cv_trial(const std::vector<PromiseRecord>& records, const TrialConfig& config,
                         Subtask subtask, const TrainOptions& options, int k = 4,
                         uint64_t seed = 42);

struct TrainedSingle {
    std::unique_ptr<SingleTaskModel> model;
    std::map<std::string, double> metrics;
    int epochs_trained = 0;
};

// Full-data training at the winning configuration for `epochs` epochs
// (callers pass median_epoch over the CV folds).
TrainedSingle train_final(const std::vector<PromiseRecord>& records, const TrialConfig& config,
                          Subtask subtask, int epochs, const TrainOptions& options);

struct TrainedMulti {
    std::unique_ptr<MultiTaskModel> model;
    std::map<std::string, double> metrics;
    int best_epoch = 0;
};

// Model 3 protocol: stratified 90-10 holdout, cosine schedule with warmup,
// gradient accumulation, best checkpoint by mean of promise and evidence F1
// (earliest maximum). Records without an evidence label contribute only the
// promise term of the combined loss.
TrainedMulti train_multitask(const std::vector<PromiseRecord>& records,
                             const TrainSchedule& schedule, const ModelConfig& model_config);

} // namespace esgpv
