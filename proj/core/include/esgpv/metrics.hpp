#pragma once

#include "esgpv/corpus.hpp"
#include "esgpv/labels.hpp"

#include <map>
#include <string>
#include <vector>

namespace esgpv {

enum class Averaging { Binary, Macro };

// Harmonic mean of precision and recall over aligned class-index vectors.
// Binary scores the positive class (index 1); Macro averages one-vs-rest F1
// over all `n_classes`. 0/0 ratios count as 0.
double f1_score(const std::vector<int>& predictions, const std::vector<int>& gold,
                Averaging averaging, int n_classes, int positive_class = 1);

// rows = gold, cols = predicted.
std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& predictions,
                                               const std::vector<int>& gold, int n_classes);

struct MetricReport {
    std::map<Subtask, double> f1;             // binary for 1-2, macro for 3-4
    std::map<Subtask, int> support;           // rows scored per subtask
    double mean_f1 = 0.0;                     // unweighted mean of the four
    std::map<Subtask, std::vector<std::vector<int>>> confusion;

    std::string to_json() const;
};

struct SubmissionRow {
    std::string record_id;
    std::string promise_status;
    std::string evidence_status;
    std::string clarity;
    std::string timing;
};

// Scores a submission against gold labels. Subtasks 2-4 are scored on the
// records that carry the gold label; subtask 1 on all labelled records.
MetricReport evaluate(const std::vector<SubmissionRow>& submission,
                      const std::vector<PromiseRecord>& gold);

} // namespace esgpv
