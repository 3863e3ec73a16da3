#include "esgpv/metrics.hpp"

#include "esgpv/common.hpp"

#include <json.hpp>

#include <map>

namespace esgpv {

namespace {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_for_class(const std::vector<int>& predictions, const std::vector<int>& gold,
                    int cls) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
        const bool p = predictions[i] == cls;
        const bool g = gold[i] == cls;
        if (p && g) ++tp;
        else if (p) ++fp;
        else if (g) ++fn;
    }
    const double precision = safe_ratio(tp, tp + fp);
    const double recall = safe_ratio(tp, tp + fn);
    return safe_ratio(2.0 * precision * recall, precision + recall);
}

} // namespace

double f1_score(const std::vector<int>& predictions, const std::vector<int>& gold,
                Averaging averaging, int n_classes, int positive_class) {
    if (predictions.size() != gold.size()) {
        throw ValidationError("f1_score: " + std::to_string(predictions.size()) +
                              " predictions vs " + std::to_string(gold.size()) +
                              " gold labels");
    }
    if (predictions.empty()) throw ValidationError("f1_score: empty input");
    if (averaging == Averaging::Binary) {
        return f1_for_class(predictions, gold, positive_class);
    }
    double total = 0.0;
    for (int cls = 0; cls < n_classes; ++cls) {
        total += f1_for_class(predictions, gold, cls);
    }
    return total / static_cast<double>(n_classes);
}

std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& predictions,
                                               const std::vector<int>& gold, int n_classes) {
    if (predictions.size() != gold.size()) {
        throw ValidationError("confusion_matrix: length mismatch");
    }
    std::vector<std::vector<int>> m(static_cast<size_t>(n_classes),
                                    std::vector<int>(static_cast<size_t>(n_classes), 0));
    for (size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] < 0 || gold[i] >= n_classes || predictions[i] < 0 ||
            predictions[i] >= n_classes) {
            throw ValidationError("confusion_matrix: class index out of range");
        }
        ++m[static_cast<size_t>(gold[i])][static_cast<size_t>(predictions[i])];
    }
    return m;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    for (const auto task : {Subtask::Promise, Subtask::Evidence, Subtask::Clarity,
                            Subtask::Timing}) {
        nlohmann::ordered_json entry;
        if (auto it = f1.find(task); it != f1.end()) entry["f1"] = it->second;
        if (auto it = support.find(task); it != support.end()) entry["support"] = it->second;
        if (auto it = confusion.find(task); it != confusion.end())
            entry["confusion"] = it->second;
        j[subtask_name(task)] = std::move(entry);
    }
    j["mean_f1"] = mean_f1;
    return j.dump(2);
}

MetricReport evaluate(const std::vector<SubmissionRow>& submission,
                      const std::vector<PromiseRecord>& gold) {
    std::map<std::string, const SubmissionRow*> by_id;
    for (const auto& row : submission) by_id[row.record_id] = &row;

    std::map<Subtask, std::vector<int>> preds, golds;
    for (const auto& rec : gold) {
        if (!rec.labels) continue;
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) {
            throw ValidationError("submission is missing record id '" + rec.id + "'");
        }
        const SubmissionRow& row = *it->second;
        const std::pair<Subtask, const std::string*> cells[] = {
            {Subtask::Promise, &row.promise_status},
            {Subtask::Evidence, &row.evidence_status},
            {Subtask::Clarity, &row.clarity},
            {Subtask::Timing, &row.timing},
        };
        for (const auto& [task, cell] : cells) {
            const auto gold_idx = label_index(*rec.labels, task);
            if (!gold_idx) continue;
            const auto pred_idx = parse_class(task, *cell);
            if (!pred_idx) {
                throw ValidationError("record '" + rec.id + "': unrecognized " +
                                      subtask_name(task) + " value '" + *cell + "'");
            }
            preds[task].push_back(*pred_idx);
            golds[task].push_back(*gold_idx);
        }
    }

    MetricReport report;
    double sum = 0.0;
    int scored = 0;
    for (const auto task : {Subtask::Promise, Subtask::Evidence, Subtask::Clarity,
                            Subtask::Timing}) {
        auto p = preds.find(task);
        if (p == preds.end() || p->second.empty()) continue;
        const auto& g = golds[task];
        const auto averaging =
            class_count(task) == 2 ? Averaging::Binary : Averaging::Macro;
        report.f1[task] = f1_score(p->second, g, averaging, class_count(task));
        report.support[task] = static_cast<int>(g.size());
        report.confusion[task] = confusion_matrix(p->second, g, class_count(task));
        sum += report.f1[task];
        ++scored;
    }
    if (scored == 0) throw ValidationError("evaluate: no labelled records to score");
    report.mean_f1 = sum / static_cast<double>(scored);
    return report;
}

} // namespace esgpv
