#pragma once

#include <memory>
#include <string>
#include <vector>

namespace esgpv {

// Pluggable entity detection seam. The reference implementation is
// deterministic regex matching; a statistical NER can be dropped in behind
// this interface.
class EntityDetector {
public:
    virtual ~EntityDetector() = default;
    virtual bool has_numbers(const std::string& text) const = 0;
    // Date mentions in textual order: calendar years 1900-2099, month names
    // (optionally followed by a year), numeric d/m/y forms, and
    // "within N years" phrases.
    virtual std::vector<std::string> find_dates(const std::string& text) const = 0;
    bool has_dates(const std::string& text) const { return !find_dates(text).empty(); }
};

class RegexEntityDetector final : public EntityDetector {
public:
    bool has_numbers(const std::string& text) const override;
    std::vector<std::string> find_dates(const std::string& text) const override;
};

const EntityDetector& default_entity_detector();

} // namespace esgpv
