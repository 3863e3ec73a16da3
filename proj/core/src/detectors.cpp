#include "esgpv/detectors.hpp"

#include <regex>

namespace esgpv {

namespace {

// Digit groups with optional thousands separators, decimals, currency
// prefix or percent suffix.
const std::regex kNumberRe(R"([$€£]?\d[\d,]*(\.\d+)?%?)",
                           std::regex::ECMAScript | std::regex::optimize);

// "may" is deliberately absent: it collides with the modal verb.
const std::regex kDateRe(
    R"((january|february|march|april|june|july|august|september|october|november|december)(\s+\d{4})?)"
    R"(|within\s+(\d+|one|two|three|four|five|six|seven|eight|nine|ten)\s+years?)"
    R"(|\b(19|20)\d{2}\b)"
    R"(|\b\d{1,2}[/.]\d{1,2}[/.]\d{2,4}\b)",
    std::regex::ECMAScript | std::regex::icase | std::regex::optimize);

} // namespace

bool RegexEntityDetector::has_numbers(const std::string& text) const {
    return std::regex_search(text, kNumberRe);
}

std::vector<std::string> RegexEntityDetector::find_dates(const std::string& text) const {
    std::vector<std::string> dates;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kDateRe);
         it != std::sregex_iterator(); ++it) {
        dates.push_back(it->str());
    }
    return dates;
}

const EntityDetector& default_entity_detector() {
    static const RegexEntityDetector detector;
    return detector;
}

} // namespace esgpv
