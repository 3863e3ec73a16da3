#pragma once

#include "esgpv/model.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace esgpv {

// A checkpoint is a directory holding manifest.json plus params.bin, a flat
// key -> tensor container with keys namespaced encoder.*, pooler.*,
// head.promise.*, head.evidence.* (single-head models use their own task
// namespace).
struct CheckpointManifest {
    int format_version = 1;
    std::string kind; // "combined" | "single"
    std::optional<Subtask> subtask;
    std::string input = "raw";
    ModelConfig model;
    uint64_t seed = 0;
    std::vector<std::string> vocab;
    std::map<std::string, double> metrics;
};

void save_checkpoint(const std::filesystem::path& dir, const CheckpointManifest& manifest,
                     const ag::ParamStore& params);
void save_checkpoint(const std::filesystem::path& dir, TextClassifier& model,
                     const std::map<std::string, double>& metrics);

struct LoadedCheckpoint {
    CheckpointManifest manifest;
    std::unique_ptr<TextClassifier> model;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

// The raw tensor container, exposed for audits and tests.
void write_param_blob(const std::filesystem::path& file,
                      const std::map<std::string, ag::Mat>& tensors);
std::map<std::string, ag::Mat> read_param_blob(const std::filesystem::path& file);

} // namespace esgpv
