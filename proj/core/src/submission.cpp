#include "esgpv/submission.hpp"

#include "esgpv/common.hpp"

#include "detail/csv.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace esgpv {

namespace {

const char* kHeader = "id,promise_status,evidence_status,evidence_quality,verification_timeline";

const TaskPrediction& task_of(const Prediction& p, Subtask task) {
    auto it = p.tasks.find(task);
    if (it == p.tasks.end()) {
        throw ValidationError("prediction for record '" + p.record_id + "' is missing " +
                              subtask_name(task));
    }
    return it->second;
}

std::string list_ids(const std::set<std::string>& ids) {
    std::ostringstream out;
    bool first = true;
    for (const auto& id : ids) {
        if (!first) out << ", ";
        out << id;
        first = false;
    }
    return out.str();
}

} // namespace

std::vector<SubmissionRow> assemble_submission(const std::vector<Prediction>& pred_12,
                                               const std::vector<Prediction>& pred_34,
                                               const std::vector<PromiseRecord>& records,
                                               const PlaceholderConfig& placeholders) {
    std::map<std::string, const Prediction*> map_12, map_34;
    for (const auto& p : pred_12) map_12[p.record_id] = &p;
    for (const auto& p : pred_34) map_34[p.record_id] = &p;

    std::set<std::string> missing;
    for (const auto& rec : records) {
        if (!map_12.count(rec.id) || !map_34.count(rec.id)) missing.insert(rec.id);
    }
    if (!missing.empty()) {
        throw ValidationError("predictions missing record ids: " + list_ids(missing));
    }

    std::vector<SubmissionRow> rows;
    rows.reserve(records.size());
    for (const auto& rec : records) {
        const Prediction& p12 = *map_12[rec.id];
        const Prediction& p34 = *map_34[rec.id];
        SubmissionRow row;
        row.record_id = rec.id;
        row.promise_status =
            class_name(Subtask::Promise, task_of(p12, Subtask::Promise).label_index);
        if (row.promise_status == "No") {
            // Dependency repair: downstream subtasks are undefined for
            // non-promises; emit the configured placeholders.
            row.evidence_status = placeholders.evidence;
            row.clarity = placeholders.clarity;
            row.timing = placeholders.timing;
        } else {
            row.evidence_status =
                class_name(Subtask::Evidence, task_of(p12, Subtask::Evidence).label_index);
            row.clarity =
                class_name(Subtask::Clarity, task_of(p34, Subtask::Clarity).label_index);
            row.timing =
                class_name(Subtask::Timing, task_of(p34, Subtask::Timing).label_index);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_submission_csv(const std::filesystem::path& path,
                          const std::vector<SubmissionRow>& rows) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    out << kHeader << "\n";
    for (const auto& row : rows) {
        out << detail::csv_escape(row.record_id) << ',' << detail::csv_escape(row.promise_status)
            << ',' << detail::csv_escape(row.evidence_status) << ','
            << detail::csv_escape(row.clarity) << ',' << detail::csv_escape(row.timing) << "\n";
    }
}

std::vector<SubmissionRow> load_submission_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open submission: " + path.string());
    auto header = detail::read_csv_row(in);
    if (!header) throw ValidationError("empty submission file: " + path.string());
    std::ostringstream joined;
    for (size_t i = 0; i < header->size(); ++i) {
        if (i) joined << ',';
        joined << (*header)[i];
    }
    if (joined.str() != kHeader) {
        throw ValidationError("unexpected submission header '" + joined.str() + "'");
    }

    std::vector<SubmissionRow> rows;
    std::set<std::string> seen;
    size_t line = 1;
    while (auto cells = detail::read_csv_row(in)) {
        ++line;
        if (cells->size() == 1 && (*cells)[0].empty()) continue;
        if (cells->size() != 5) {
            throw ValidationError("submission row " + std::to_string(line) + ": expected 5 "
                                  "columns, got " + std::to_string(cells->size()));
        }
        SubmissionRow row{(*cells)[0], (*cells)[1], (*cells)[2], (*cells)[3], (*cells)[4]};
        if (row.record_id.empty()) {
            throw ValidationError("submission row " + std::to_string(line) + ": empty id");
        }
        if (!seen.insert(row.record_id).second) {
            throw ValidationError("submission row " + std::to_string(line) +
                                  ": duplicate id '" + row.record_id + "'");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace esgpv
