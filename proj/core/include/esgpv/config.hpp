#pragma once

#include "esgpv/inference.hpp"
#include "esgpv/tpe.hpp"
#include "esgpv/trainer.hpp"

#include <filesystem>

namespace esgpv {

// Everything train.yaml can set; defaults follow the published protocol.
struct PipelineConfig {
    uint64_t seed = 42;
    ModelConfig model;
    SearchSpace search;
    int n_trials = 7;
    int cv_folds = 4;
    int cv_patience = 2;
    int cv_max_epochs = 8;
    bool class_weighted = true;
    TrainSchedule multitask;
    TTAConfig tta;

    TrainOptions train_options(InputKind input) const;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig default_config();

} // namespace esgpv
