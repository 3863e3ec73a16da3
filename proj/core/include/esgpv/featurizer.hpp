#pragma once

#include "esgpv/corpus.hpp"
#include "esgpv/detectors.hpp"
#include "esgpv/labels.hpp"
#include "esgpv/lexicon.hpp"
#include "esgpv/sentiment.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace esgpv {

// Deterministic tag block prepended to the raw text for one subtask.
// tag_text always regenerates from `features` via render_tags (round-trip
// equality) and ends with ". ".
struct FeatureAnnotation {
    Subtask subtask = Subtask::Promise;
    std::string tag_text;
    std::map<std::string, std::string> features;
    uint64_t source_hash = 0; // fnv1a64 of the featurized raw text
};

FeatureAnnotation featurize_promise(const std::string& text, const LexiconSet& lexicons,
                                    const SentimentScorer& sentiment);
FeatureAnnotation featurize_evidence(const std::string& text, const LexiconSet& lexicons,
                                     const EntityDetector& detector);
FeatureAnnotation featurize_clarity(const std::string& text, const LexiconSet& lexicons);
FeatureAnnotation featurize_timing(const std::string& text, const LexiconSet& lexicons,
                                   const EntityDetector& detector);

FeatureAnnotation featurize(Subtask task, const std::string& text, const LexiconSet& lexicons,
                            const SentimentScorer& sentiment, const EntityDetector& detector);

// Rebuilds the tag block from a feature map (canonical tag order and
// punctuation).
std::string render_tags(Subtask task, const std::map<std::string, std::string>& features);

struct TagBlock {
    std::map<std::string, std::string> features;
    size_t length = 0; // bytes consumed, including the trailing space
};

// Parses a complete tag block at position 0, if present.
std::optional<TagBlock> parse_tag_block(Subtask task, std::string_view text);

// First subtask whose full tag grammar matches at position 0.
std::optional<std::pair<Subtask, size_t>> detect_tag_prefix(std::string_view text);

// tag_text + raw_text. Rejects annotations built from different text and
// text that already starts with a tag block.
std::string enrich(const PromiseRecord& record, const FeatureAnnotation& annotation);

} // namespace esgpv
