#pragma once

#include "esgpv/labels.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace esgpv {

// One text instance from an ESG report, optionally gold-labelled.
struct PromiseRecord {
    std::string id;
    std::string raw_text;
    std::optional<int> page_number; // non-negative when present
    std::string source_tag = "ESG REPORT";
    std::optional<LabelSet> labels;
    std::optional<std::string> enriched_text; // written by the featurize CLI
};

enum class SchemaMode { Strict, Permissive };

// Reads JSON-lines (.jsonl/.json) or CSV (.csv) record files. Errors name
// the offending row and field. Strict mode rejects dependent labels on
// non-promise rows.
std::vector<PromiseRecord> load_corpus(const std::filesystem::path& path, SchemaMode mode);

void save_corpus_jsonl(const std::filesystem::path& path,
                       const std::vector<PromiseRecord>& records);

std::string record_to_jsonl(const PromiseRecord& record);

struct FoldSplit {
    int fold_index = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> validation_ids;
};

// Deterministic stratified k-fold on the selected subtask label. Per-fold
// class counts deviate from exact proportionality by at most one.
std::vector<FoldSplit> stratified_kfold(const std::vector<PromiseRecord>& records, int k,
                                        Subtask label_selector, uint64_t seed);

// Deterministic stratified holdout. Validation size is the nearest integer
// to (1 - train_fraction) * N, allocated per class by largest remainder
// (ties broken by class order, then record id order).
std::pair<std::vector<std::string>, std::vector<std::string>>
holdout_split(const std::vector<PromiseRecord>& records, double train_fraction,
              Subtask label_selector, uint64_t seed);

std::string split_manifest_json(uint64_t seed, int k, const std::vector<FoldSplit>& folds);
std::vector<FoldSplit> parse_split_manifest(const std::string& json_text);

const PromiseRecord& record_by_id(const std::vector<PromiseRecord>& records,
                                  const std::string& id);

// Records carrying a gold label for the subtask.
std::vector<PromiseRecord> with_label(const std::vector<PromiseRecord>& records, Subtask task);

} // namespace esgpv
