#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace esgpv {

struct SearchSpace {
    double lr_min = 1e-5;
    double lr_max = 5e-5;
    std::vector<int> batch_sizes = {4, 8, 12};
    double wd_min = 0.01;
    double wd_max = 0.3;
};

struct TrialConfig {
    double learning_rate = 1e-5;
    int batch_size = 8;
    double weight_decay = 0.01;
    int trial_index = 0;
};

struct TrialResult {
    TrialConfig config;
    std::vector<double> fold_losses;
    double mean_validation_loss = 0.0;
    std::vector<int> fold_best_epochs; // parallel to fold_losses
};

// Tree-structured Parzen estimator over independent dimensions: learning
// rate log-uniform, weight decay uniform, batch size categorical. The first
// `n_startup` proposals are seeded uniform draws; afterwards history is
// split at the gamma-quantile by loss and candidates sampled from the good
// density are ranked by the good/bad density ratio.
struct TpeOptions {
    int n_startup = 4;
    double gamma_quantile = 0.25;
    int n_candidates = 24;
};

TrialConfig sample_trials(const SearchSpace& space, int n_trials, uint64_t seed,
                          const std::vector<TrialResult>& history,
                          const TpeOptions& options = {});

// Best result: minimal mean loss, ties to the lower trial_index.
const TrialResult& select_best(const std::vector<TrialResult>& results);

std::string trial_result_to_json(const TrialResult& result);
TrialResult trial_result_from_json(const std::string& line);

} // namespace esgpv
