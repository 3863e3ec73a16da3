#include "esgpv/corpus.hpp"

#include "esgpv/common.hpp"
#include "esgpv/rng.hpp"
#include "esgpv/textutil.hpp"

#include "detail/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace esgpv {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void row_error(size_t row, const std::string& field, const std::string& what) {
    throw ValidationError("row " + std::to_string(row) + ", field '" + field + "': " + what);
}

// Field bag shared by the JSONL and CSV paths. Values arrive as strings
// except page_number, which JSONL may carry as a number.
struct RawRow {
    std::map<std::string, std::string> fields;
    std::optional<int> page_number;
    bool has_page = false;
};

int parse_label_or_fail(Subtask task, const std::string& raw, size_t row,
                        const std::string& field) {
    const auto idx = parse_class(task, raw);
    if (!idx) row_error(row, field, "unrecognized label '" + raw + "'");
    return *idx;
}

PromiseRecord record_from_row(const RawRow& raw, size_t row, SchemaMode mode) {
    PromiseRecord rec;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = raw.fields.find(key);
        if (it == raw.fields.end() || it->second.empty()) return std::nullopt;
        return it->second;
    };

    const auto id = get("id");
    if (!id) row_error(row, "id", "missing or empty");
    rec.id = *id;

    const auto text = get("text");
    if (!text || trim(*text).empty()) row_error(row, "text", "missing or empty");
    rec.raw_text = *text;

    if (raw.has_page) {
        if (!raw.page_number || *raw.page_number < 0)
            row_error(row, "page_number", "must be a non-negative integer");
        rec.page_number = raw.page_number;
    }
    if (const auto tag = get("source_tag")) rec.source_tag = *tag;
    if (const auto enriched = get("enriched_text")) rec.enriched_text = *enriched;

    const auto promise = get("promise_status");
    const auto evidence = get("evidence_status");
    const auto clarity = get("evidence_quality");
    const auto timing = get("verification_timeline");

    if (!promise) {
        if (evidence || clarity || timing)
            row_error(row, "promise_status",
                      "dependent labels present without promise_status");
        return rec;
    }

    LabelSet labels;
    labels.promise_status =
        static_cast<PromiseStatus>(parse_label_or_fail(Subtask::Promise, *promise, row,
                                                       "promise_status"));
    if (evidence)
        labels.evidence_status = static_cast<EvidenceStatus>(
            parse_label_or_fail(Subtask::Evidence, *evidence, row, "evidence_status"));
    if (clarity)
        labels.clarity = static_cast<Clarity>(
            parse_label_or_fail(Subtask::Clarity, *clarity, row, "evidence_quality"));
    if (timing)
        labels.timing = static_cast<Timing>(
            parse_label_or_fail(Subtask::Timing, *timing, row, "verification_timeline"));

    if (mode == SchemaMode::Strict && labels.promise_status == PromiseStatus::No &&
        (labels.evidence_status || labels.clarity || labels.timing)) {
        row_error(row, "promise_status",
                  "dependent labels present on a non-promise row (strict mode)");
    }
    rec.labels = labels;
    return rec;
}

std::vector<PromiseRecord> load_jsonl(const std::filesystem::path& path, SchemaMode mode) {
    std::ifstream in(path);
    std::vector<PromiseRecord> records;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            row_error(row, "<line>", std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) row_error(row, "<line>", "expected a JSON object");
        RawRow raw;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const std::string& key = it.key();
            if (key == "page_number") {
                raw.has_page = !it->is_null();
                if (it->is_number_integer()) {
                    raw.page_number = it->get<int>();
                } else if (it->is_string()) {
                    try {
                        raw.page_number = std::stoi(it->get<std::string>());
                    } catch (...) {
                        row_error(row, "page_number", "not an integer");
                    }
                } else if (!it->is_null()) {
                    row_error(row, "page_number", "not an integer");
                }
                continue;
            }
            if (it->is_null()) continue;
            if (it->is_string()) {
                raw.fields[key] = it->get<std::string>();
            } else if (it->is_number() || it->is_boolean()) {
                raw.fields[key] = it->dump();
            } else {
                row_error(row, key, "expected a scalar value");
            }
        }
        records.push_back(record_from_row(raw, row, mode));
    }
    return records;
}

std::vector<PromiseRecord> load_csv(const std::filesystem::path& path, SchemaMode mode) {
    std::ifstream in(path);
    auto header = detail::read_csv_row(in);
    std::vector<PromiseRecord> records;
    if (!header) return records;
    size_t row = 1;
    while (auto cells = detail::read_csv_row(in)) {
        ++row;
        if (cells->size() == 1 && (*cells)[0].empty()) continue; // blank line
        RawRow raw;
        for (size_t i = 0; i < header->size() && i < cells->size(); ++i) {
            const std::string& key = (*header)[i];
            const std::string& value = (*cells)[i];
            if (key == "page_number") {
                if (value.empty()) continue;
                raw.has_page = true;
                try {
                    raw.page_number = std::stoi(value);
                } catch (...) {
                    row_error(row, "page_number", "not an integer");
                }
                continue;
            }
            if (!value.empty()) raw.fields[key] = value;
        }
        records.push_back(record_from_row(raw, row, mode));
    }
    return records;
}

// Groups record indices by class of the selected label; errors on records
// missing the label.
std::map<int, std::vector<std::string>> group_by_class(const std::vector<PromiseRecord>& records,
                                                       Subtask task) {
    std::map<int, std::vector<std::string>> groups;
    for (const auto& rec : records) {
        if (!rec.labels) {
            throw ValidationError("record '" + rec.id + "' has no labels; cannot stratify on " +
                                  subtask_name(task));
        }
        const auto idx = label_index(*rec.labels, task);
        if (!idx) {
            throw ValidationError("record '" + rec.id + "' has no " +
                                  std::string(subtask_name(task)) + " label");
        }
        groups[*idx].push_back(rec.id);
    }
    for (auto& [cls, ids] : groups) std::sort(ids.begin(), ids.end());
    return groups;
}

} // namespace

std::vector<PromiseRecord> load_corpus(const std::filesystem::path& path, SchemaMode mode) {
    if (!std::filesystem::exists(path)) {
        throw ValidationError("no such file: " + path.string());
    }
    const std::string ext = to_lower(path.extension().string());
    std::vector<PromiseRecord> records;
    if (ext == ".csv") {
        records = load_csv(path, mode);
    } else {
        records = load_jsonl(path, mode);
    }
    std::set<std::string> seen;
    for (const auto& rec : records) {
        if (!seen.insert(rec.id).second) {
            throw ValidationError("duplicate record id '" + rec.id + "'");
        }
    }
    return records;
}

std::string record_to_jsonl(const PromiseRecord& record) {
    ordered_json obj;
    obj["id"] = record.id;
    obj["text"] = record.raw_text;
    if (record.page_number) obj["page_number"] = *record.page_number;
    obj["source_tag"] = record.source_tag;
    if (record.labels) {
        obj["promise_status"] = to_string(record.labels->promise_status);
        if (record.labels->evidence_status)
            obj["evidence_status"] = to_string(*record.labels->evidence_status);
        if (record.labels->clarity)
            obj["evidence_quality"] = to_string(*record.labels->clarity);
        if (record.labels->timing)
            obj["verification_timeline"] = to_string(*record.labels->timing);
    }
    if (record.enriched_text) obj["enriched_text"] = *record.enriched_text;
    return obj.dump();
}

void save_corpus_jsonl(const std::filesystem::path& path,
                       const std::vector<PromiseRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    for (const auto& rec : records) out << record_to_jsonl(rec) << "\n";
}

std::vector<FoldSplit> stratified_kfold(const std::vector<PromiseRecord>& records, int k,
                                        Subtask label_selector, uint64_t seed) {
    if (k < 2) throw ValidationError("k must be at least 2");
    auto groups = group_by_class(records, label_selector);
    for (const auto& [cls, ids] : groups) {
        if (static_cast<int>(ids.size()) < k) {
            throw ValidationError("class '" + class_name(label_selector, cls) + "' has " +
                                  std::to_string(ids.size()) + " members, fewer than k=" +
                                  std::to_string(k));
        }
    }

    std::vector<FoldSplit> folds(static_cast<size_t>(k));
    for (int f = 0; f < k; ++f) folds[static_cast<size_t>(f)].fold_index = f;

    DetRng rng(splitmix64(seed));
    // Deal each class round-robin after a seeded shuffle; extras land in the
    // lowest-indexed folds, giving per-fold deviation <= 1 per class.
    for (auto& [cls, ids] : groups) {
        rng.shuffle(ids);
        for (size_t i = 0; i < ids.size(); ++i) {
            folds[i % static_cast<size_t>(k)].validation_ids.push_back(ids[i]);
        }
    }
    for (auto& fold : folds) {
        std::sort(fold.validation_ids.begin(), fold.validation_ids.end());
        std::set<std::string> val(fold.validation_ids.begin(), fold.validation_ids.end());
        for (const auto& rec : records) {
            if (!val.count(rec.id)) fold.train_ids.push_back(rec.id);
        }
        std::sort(fold.train_ids.begin(), fold.train_ids.end());
    }
    return folds;
}

std::pair<std::vector<std::string>, std::vector<std::string>>
holdout_split(const std::vector<PromiseRecord>& records, double train_fraction,
              Subtask label_selector, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train_fraction must be in (0,1)");
    }
    auto groups = group_by_class(records, label_selector);
    if (groups.size() < 2) {
        throw ValidationError("single-class corpus; stratified holdout needs at least "
                              "two classes of " + std::string(subtask_name(label_selector)));
    }

    const auto n = static_cast<double>(records.size());
    // Validation total is the nearest integer, clamped so both sides stay
    // non-empty. Per-class counts by largest remainder.
    long long total = std::llround((1.0 - train_fraction) * n);
    total = std::max<long long>(1, std::min<long long>(total, static_cast<long long>(n) - 1));

    struct ClassQuota {
        int cls;
        long long base;
        double remainder;
        long long capacity;
    };
    std::vector<ClassQuota> quotas;
    long long assigned = 0;
    for (const auto& [cls, ids] : groups) {
        const double exact = (1.0 - train_fraction) * static_cast<double>(ids.size());
        const auto base = static_cast<long long>(std::floor(exact + 1e-9));
        quotas.push_back({cls, base, exact - static_cast<double>(base),
                          static_cast<long long>(ids.size())});
        assigned += base;
    }
    std::vector<size_t> order(quotas.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (quotas[a].remainder != quotas[b].remainder)
            return quotas[a].remainder > quotas[b].remainder;
        return quotas[a].cls < quotas[b].cls; // tie: class order
    });
    long long rest = total - assigned;
    size_t cursor = 0;
    while (rest > 0) {
        auto& q = quotas[order[cursor % order.size()]];
        if (q.base < q.capacity) {
            ++q.base;
            --rest;
        }
        ++cursor;
        if (cursor > order.size() * 4) break; // all classes exhausted
    }

    DetRng rng(splitmix64(seed));
    std::set<std::string> val_ids;
    for (const auto& q : quotas) {
        auto ids = groups[q.cls]; // already sorted by id
        rng.shuffle(ids);
        for (long long i = 0; i < q.base && i < static_cast<long long>(ids.size()); ++i) {
            val_ids.insert(ids[static_cast<size_t>(i)]);
        }
    }

    std::vector<std::string> train, val;
    for (const auto& rec : records) {
        (val_ids.count(rec.id) ? val : train).push_back(rec.id);
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {train, val};
}

std::string split_manifest_json(uint64_t seed, int k, const std::vector<FoldSplit>& folds) {
    ordered_json obj;
    obj["seed"] = seed;
    obj["k"] = k;
    obj["folds"] = ordered_json::array();
    for (const auto& fold : folds) {
        ordered_json f;
        f["fold"] = fold.fold_index;
        f["train"] = fold.train_ids;
        f["val"] = fold.validation_ids;
        obj["folds"].push_back(std::move(f));
    }
    return obj.dump(2);
}

std::vector<FoldSplit> parse_split_manifest(const std::string& json_text) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid split manifest: ") + e.what());
    }
    std::vector<FoldSplit> folds;
    for (const auto& f : obj.at("folds")) {
        FoldSplit fold;
        fold.fold_index = f.at("fold").get<int>();
        fold.train_ids = f.at("train").get<std::vector<std::string>>();
        fold.validation_ids = f.at("val").get<std::vector<std::string>>();
        folds.push_back(std::move(fold));
    }
    return folds;
}

const PromiseRecord& record_by_id(const std::vector<PromiseRecord>& records,
                                  const std::string& id) {
    for (const auto& rec : records) {
        if (rec.id == id) return rec;
    }
    throw ValidationError("unknown record id '" + id + "'");
}

std::vector<PromiseRecord> with_label(const std::vector<PromiseRecord>& records, Subtask task) {
    std::vector<PromiseRecord> out;
    for (const auto& rec : records) {
        if (rec.labels && label_index(*rec.labels, task)) out.push_back(rec);
    }
    return out;
}

} // namespace esgpv
