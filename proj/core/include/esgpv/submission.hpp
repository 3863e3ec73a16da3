#pragma once

#include "esgpv/inference.hpp"
#include "esgpv/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace esgpv {

// Values filled in for the dependent subtasks when promise_status is No.
struct PlaceholderConfig {
    std::string evidence = "No";
    std::string clarity = "Not Clear";
    std::string timing = "other";
};

// Merges subtask 1-2 predictions (combined model) with subtask 3-4
// predictions (feature-enhanced models) into one row per record, applying
// dependency repair. Missing ids in either set are an error listing the
// symmetric difference.
std::vector<SubmissionRow> assemble_submission(const std::vector<Prediction>& pred_12,
                                               const std::vector<Prediction>& pred_34,
                                               const std::vector<PromiseRecord>& records,
                                               const PlaceholderConfig& placeholders = {});

// Header: id,promise_status,evidence_status,evidence_quality,verification_timeline
// UTF-8, LF line endings.
void write_submission_csv(const std::filesystem::path& path,
                          const std::vector<SubmissionRow>& rows);
std::vector<SubmissionRow> load_submission_csv(const std::filesystem::path& path);

} // namespace esgpv
