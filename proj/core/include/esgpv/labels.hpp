#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esgpv {

// The four PromiseEval subtasks. Numbering follows the task definition.
enum class Subtask { Promise = 1, Evidence = 2, Clarity = 3, Timing = 4 };

enum class PromiseStatus { No = 0, Yes = 1 };
enum class EvidenceStatus { No = 0, Yes = 1 };
enum class Clarity { Clear = 0, NotClear = 1, Misleading = 2 };
enum class Timing { Within2Years = 0, TwoToFiveYears = 1, BeyondFiveYears = 2, Other = 3 };

// Evidence, clarity and timing are dependent labels: they may only be
// present when promise_status is Yes.
struct LabelSet {
    PromiseStatus promise_status = PromiseStatus::No;
    std::optional<EvidenceStatus> evidence_status;
    std::optional<Clarity> clarity;
    std::optional<Timing> timing;
};

int class_count(Subtask task);
const std::vector<std::string>& class_names(Subtask task);
const std::string& class_name(Subtask task, int index);
const char* subtask_name(Subtask task);
std::optional<Subtask> parse_subtask(int number);

// Canonical matching key: trim, lowercase, strip internal spaces,
// underscores and hyphens ("Not Clear" and "not_clear" both map to
// "notclear").
std::string canonical_key(std::string_view raw);

// Parses a label string for the given subtask into a class index.
std::optional<int> parse_class(Subtask task, std::string_view raw);

// Class index carried by a label set for one subtask, if present.
std::optional<int> label_index(const LabelSet& labels, Subtask task);

std::string to_string(PromiseStatus v);
std::string to_string(EvidenceStatus v);
std::string to_string(Clarity v);
std::string to_string(Timing v);

} // namespace esgpv
