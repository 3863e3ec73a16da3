#include "esgpv/labels.hpp"

#include "esgpv/common.hpp"

#include <algorithm>
#include <cctype>

namespace esgpv {

namespace {

const std::vector<std::string> kBinaryNames = {"No", "Yes"};
const std::vector<std::string> kClarityNames = {"Clear", "Not Clear", "Misleading"};
const std::vector<std::string> kTimingNames = {"within_2_years", "2_to_5_years",
                                               "beyond_5_years", "other"};

} // namespace

int class_count(Subtask task) {
    switch (task) {
    case Subtask::Promise:
    case Subtask::Evidence:
        return 2;
    case Subtask::Clarity:
        return 3;
    case Subtask::Timing:
        return 4;
    }
    throw InternalError("unknown subtask");
}

const std::vector<std::string>& class_names(Subtask task) {
    switch (task) {
    case Subtask::Promise:
    case Subtask::Evidence:
        return kBinaryNames;
    case Subtask::Clarity:
        return kClarityNames;
    case Subtask::Timing:
        return kTimingNames;
    }
    throw InternalError("unknown subtask");
}

const std::string& class_name(Subtask task, int index) {
    const auto& names = class_names(task);
    if (index < 0 || index >= static_cast<int>(names.size())) {
        throw InternalError("class index out of range for " + std::string(subtask_name(task)));
    }
    return names[static_cast<size_t>(index)];
}

const char* subtask_name(Subtask task) {
    switch (task) {
    case Subtask::Promise:
        return "promise_status";
    case Subtask::Evidence:
        return "evidence_status";
    case Subtask::Clarity:
        return "evidence_quality";
    case Subtask::Timing:
        return "verification_timeline";
    }
    throw InternalError("unknown subtask");
}

std::optional<Subtask> parse_subtask(int number) {
    if (number < 1 || number > 4) return std::nullopt;
    return static_cast<Subtask>(number);
}

std::string canonical_key(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '_' || c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::optional<int> parse_class(Subtask task, std::string_view raw) {
    const std::string key = canonical_key(raw);
    if (key.empty()) return std::nullopt;
    switch (task) {
    case Subtask::Promise:
    case Subtask::Evidence:
        if (key == "yes") return 1;
        if (key == "no") return 0;
        return std::nullopt;
    case Subtask::Clarity:
        if (key == "clear") return 0;
        if (key == "notclear") return 1;
        if (key == "misleading") return 2;
        return std::nullopt;
    case Subtask::Timing:
        if (key == "within2years" || key == "lessthan2years" || key == "under2years")
            return 0;
        if (key == "2to5years" || key == "25years" || key == "twotofiveyears" ||
            key == "between2and5years")
            return 1;
        if (key == "beyond5years" || key == "morethan5years" || key == "over5years" ||
            key == "beyondfiveyears" || key == "longerthan5years")
            return 2;
        if (key == "other") return 3;
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<int> label_index(const LabelSet& labels, Subtask task) {
    switch (task) {
    case Subtask::Promise:
        return static_cast<int>(labels.promise_status);
    case Subtask::Evidence:
        if (!labels.evidence_status) return std::nullopt;
        return static_cast<int>(*labels.evidence_status);
    case Subtask::Clarity:
        if (!labels.clarity) return std::nullopt;
        return static_cast<int>(*labels.clarity);
    case Subtask::Timing:
        if (!labels.timing) return std::nullopt;
        return static_cast<int>(*labels.timing);
    }
    return std::nullopt;
}

std::string to_string(PromiseStatus v) { return kBinaryNames[static_cast<size_t>(v)]; }
std::string to_string(EvidenceStatus v) { return kBinaryNames[static_cast<size_t>(v)]; }
std::string to_string(Clarity v) { return kClarityNames[static_cast<size_t>(v)]; }
std::string to_string(Timing v) { return kTimingNames[static_cast<size_t>(v)]; }

} // namespace esgpv
