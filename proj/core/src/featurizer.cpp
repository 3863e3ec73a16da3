#include "esgpv/featurizer.hpp"

#include "esgpv/common.hpp"
#include "esgpv/rng.hpp"
#include "esgpv/stemmer.hpp"
#include "esgpv/textutil.hpp"

#include <cctype>
#include <charconv>

namespace esgpv {

namespace {

struct TokenizedView {
    std::vector<std::string> raw;
    std::vector<std::string> stemmed;
};

TokenizedView tokenize_for_matching(const std::string& text) {
    TokenizedView view;
    view.raw = word_tokens(text);
    view.stemmed.reserve(view.raw.size());
    for (const auto& t : view.raw) view.stemmed.push_back(porter_stem(t));
    return view;
}

void require_text(const std::string& text) {
    if (trim(text).empty()) throw ValidationError("featurizer input text is empty");
}

// Dates inside a tag must stay a single token: whitespace becomes '_' and
// '.' becomes '/' so the block grammar "(TAG. )+" stays parseable.
std::string normalize_date_token(const std::string& date) {
    std::string out;
    bool in_space = false;
    for (char c : trim(date)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space) {
            out.push_back('_');
            in_space = false;
        }
        out.push_back(c == '.' ? '/' : c);
    }
    return out;
}

const std::string& feature(const std::map<std::string, std::string>& features,
                           const std::string& key) {
    auto it = features.find(key);
    if (it == features.end()) {
        throw InternalError("feature map missing key '" + key + "'");
    }
    return it->second;
}

// --- tag block parsing -------------------------------------------------

struct Cursor {
    std::string_view text;
    size_t pos = 0;

    bool literal(std::string_view want) {
        if (text.substr(pos, want.size()) != want) return false;
        pos += want.size();
        return true;
    }

    std::optional<std::string> uint_token() {
        size_t end = pos;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
        if (end == pos) return std::nullopt;
        auto token = std::string(text.substr(pos, end - pos));
        pos = end;
        return token;
    }

    // Token up to the next '.'; used for the serialized date list.
    std::optional<std::string> dot_free_token() {
        size_t end = pos;
        while (end < text.size() && text[end] != '.' && text[end] != ' ') ++end;
        if (end == pos || end >= text.size() || text[end] != '.') return std::nullopt;
        auto token = std::string(text.substr(pos, end - pos));
        pos = end;
        return token;
    }

    bool tag_end() { return literal(". "); }
};

std::optional<TagBlock> parse_promise_tags(std::string_view text) {
    Cursor c{text};
    TagBlock block;
    if (c.literal("POSITIVE Sentiment. ")) {
        block.features["sentiment"] = "POSITIVE";
    } else if (c.literal("NEGATIVE Sentiment. ")) {
        block.features["sentiment"] = "NEGATIVE";
    } else {
        return std::nullopt;
    }
    if (c.literal("Contains Promise Word. ")) {
        block.features["promise_word"] = "1";
    } else if (c.literal("No Promise Word. ")) {
        block.features["promise_word"] = "0";
    } else {
        return std::nullopt;
    }
    block.length = c.pos;
    return block;
}

std::optional<TagBlock> parse_evidence_tags(std::string_view text) {
    Cursor c{text};
    TagBlock block;
    if (!c.literal("Proof_Count_")) return std::nullopt;
    auto count = c.uint_token();
    if (!count || !c.tag_end()) return std::nullopt;
    block.features["proof_count"] = *count;
    block.features["has_numbers"] = c.literal("Has_Numbers. ") ? "1" : "0";
    block.features["has_dates"] = c.literal("Has_Dates. ") ? "1" : "0";
    block.length = c.pos;
    return block;
}

std::optional<TagBlock> parse_clarity_tags(std::string_view text) {
    Cursor c{text};
    TagBlock block;
    if (!c.literal("Vague_Terms_")) return std::nullopt;
    auto vague = c.uint_token();
    if (!vague || !c.tag_end()) return std::nullopt;
    if (!c.literal("Specific_Terms_")) return std::nullopt;
    auto specific = c.uint_token();
    if (!specific || !c.tag_end()) return std::nullopt;
    block.features["vague_terms"] = *vague;
    block.features["specific_terms"] = *specific;
    block.length = c.pos;
    return block;
}

std::optional<TagBlock> parse_timing_tags(std::string_view text) {
    Cursor c{text};
    TagBlock block;
    static constexpr std::pair<const char*, const char*> counts[] = {
        {"Within2_Terms_", "within2_terms"},
        {"Mid_Terms_", "mid_terms"},
        {"Long_Terms_", "long_terms"},
        {"Other_Terms_", "other_terms"},
    };
    for (const auto& [prefix, key] : counts) {
        if (!c.literal(prefix)) return std::nullopt;
        auto count = c.uint_token();
        if (!count || !c.tag_end()) return std::nullopt;
        block.features[key] = *count;
    }
    const size_t mark = c.pos;
    if (c.literal("Dates_")) {
        auto dates = c.dot_free_token();
        if (dates && c.tag_end()) {
            block.features["dates"] = *dates;
        } else {
            c.pos = mark; // not a dates tag after all
        }
    }
    block.length = c.pos;
    return block;
}

} // namespace

std::string render_tags(Subtask task, const std::map<std::string, std::string>& features) {
    std::string out;
    switch (task) {
    case Subtask::Promise:
        out += feature(features, "sentiment") == "POSITIVE" ? "POSITIVE Sentiment. "
                                                            : "NEGATIVE Sentiment. ";
        out += feature(features, "promise_word") == "1" ? "Contains Promise Word. "
                                                        : "No Promise Word. ";
        return out;
    case Subtask::Evidence:
        out += "Proof_Count_" + feature(features, "proof_count") + ". ";
        if (feature(features, "has_numbers") == "1") out += "Has_Numbers. ";
        if (feature(features, "has_dates") == "1") out += "Has_Dates. ";
        return out;
    case Subtask::Clarity:
        out += "Vague_Terms_" + feature(features, "vague_terms") + ". ";
        out += "Specific_Terms_" + feature(features, "specific_terms") + ". ";
        return out;
    case Subtask::Timing:
        out += "Within2_Terms_" + feature(features, "within2_terms") + ". ";
        out += "Mid_Terms_" + feature(features, "mid_terms") + ". ";
        out += "Long_Terms_" + feature(features, "long_terms") + ". ";
        out += "Other_Terms_" + feature(features, "other_terms") + ". ";
        if (auto it = features.find("dates"); it != features.end() && !it->second.empty()) {
            out += "Dates_" + it->second + ". ";
        }
        return out;
    }
    throw InternalError("unknown subtask");
}

FeatureAnnotation featurize_promise(const std::string& text, const LexiconSet& lexicons,
                                    const SentimentScorer& sentiment) {
    require_text(text);
    const auto view = tokenize_for_matching(text);

    Polarity polarity = Polarity::Negative;
    try {
        polarity = sentiment.score(text);
    } catch (const std::exception& e) {
        warn(std::string("sentiment scorer failed (") + e.what() +
             "); falling back to NEGATIVE");
    }

    FeatureAnnotation ann;
    ann.subtask = Subtask::Promise;
    ann.features["sentiment"] = polarity == Polarity::Positive ? "POSITIVE" : "NEGATIVE";
    ann.features["promise_word"] =
        lexicons.promise_words.any_match(view.raw, view.stemmed) ? "1" : "0";
    ann.tag_text = render_tags(ann.subtask, ann.features);
    ann.source_hash = fnv1a64(text);
    return ann;
}

FeatureAnnotation featurize_evidence(const std::string& text, const LexiconSet& lexicons,
                                     const EntityDetector& detector) {
    require_text(text);
    const auto view = tokenize_for_matching(text);

    const int count = lexicons.metric_terms.count_matches(view.raw, view.stemmed) +
                      lexicons.proof_terms.count_matches(view.raw, view.stemmed);

    FeatureAnnotation ann;
    ann.subtask = Subtask::Evidence;
    ann.features["proof_count"] = std::to_string(count);
    ann.features["has_numbers"] = detector.has_numbers(text) ? "1" : "0";
    ann.features["has_dates"] = detector.has_dates(text) ? "1" : "0";
    ann.tag_text = render_tags(ann.subtask, ann.features);
    ann.source_hash = fnv1a64(text);
    return ann;
}

FeatureAnnotation featurize_clarity(const std::string& text, const LexiconSet& lexicons) {
    require_text(text);
    const auto view = tokenize_for_matching(text);

    FeatureAnnotation ann;
    ann.subtask = Subtask::Clarity;
    ann.features["vague_terms"] =
        std::to_string(lexicons.vague_terms.count_matches(view.raw, view.stemmed));
    ann.features["specific_terms"] =
        std::to_string(lexicons.specific_terms.count_matches(view.raw, view.stemmed));
    ann.tag_text = render_tags(ann.subtask, ann.features);
    ann.source_hash = fnv1a64(text);
    return ann;
}

FeatureAnnotation featurize_timing(const std::string& text, const LexiconSet& lexicons,
                                   const EntityDetector& detector) {
    require_text(text);
    const auto view = tokenize_for_matching(text);

    FeatureAnnotation ann;
    ann.subtask = Subtask::Timing;
    static constexpr const char* keys[] = {"within2_terms", "mid_terms", "long_terms",
                                           "other_terms"};
    for (size_t h = 0; h < 4; ++h) {
        ann.features[keys[h]] =
            std::to_string(lexicons.horizons[h].count_matches(view.raw, view.stemmed));
    }
    const auto dates = detector.find_dates(text);
    if (!dates.empty()) {
        std::string joined;
        for (size_t i = 0; i < dates.size(); ++i) {
            if (i) joined.push_back(';');
            joined += normalize_date_token(dates[i]);
        }
        ann.features["dates"] = joined;
    }
    ann.tag_text = render_tags(ann.subtask, ann.features);
    ann.source_hash = fnv1a64(text);
    return ann;
}

FeatureAnnotation featurize(Subtask task, const std::string& text, const LexiconSet& lexicons,
                            const SentimentScorer& sentiment, const EntityDetector& detector) {
    switch (task) {
    case Subtask::Promise:
        return featurize_promise(text, lexicons, sentiment);
    case Subtask::Evidence:
        return featurize_evidence(text, lexicons, detector);
    case Subtask::Clarity:
        return featurize_clarity(text, lexicons);
    case Subtask::Timing:
        return featurize_timing(text, lexicons, detector);
    }
    throw InternalError("unknown subtask");
}

std::optional<TagBlock> parse_tag_block(Subtask task, std::string_view text) {
    switch (task) {
    case Subtask::Promise:
        return parse_promise_tags(text);
    case Subtask::Evidence:
        return parse_evidence_tags(text);
    case Subtask::Clarity:
        return parse_clarity_tags(text);
    case Subtask::Timing:
        return parse_timing_tags(text);
    }
    return std::nullopt;
}

std::optional<std::pair<Subtask, size_t>> detect_tag_prefix(std::string_view text) {
    for (Subtask task : {Subtask::Promise, Subtask::Evidence, Subtask::Clarity,
                         Subtask::Timing}) {
        if (auto block = parse_tag_block(task, text)) {
            return std::make_pair(task, block->length);
        }
    }
    return std::nullopt;
}

std::string enrich(const PromiseRecord& record, const FeatureAnnotation& annotation) {
    if (annotation.tag_text.empty() || annotation.tag_text.size() < 2 ||
        annotation.tag_text.substr(annotation.tag_text.size() - 2) != ". ") {
        throw InternalError("feature annotation has an empty or malformed tag block");
    }
    if (annotation.source_hash != fnv1a64(record.raw_text)) {
        throw ValidationError("annotation was not generated from record '" + record.id + "'");
    }
    if (detect_tag_prefix(record.raw_text)) {
        throw ValidationError("record '" + record.id + "' already carries a tag block");
    }
    return annotation.tag_text + record.raw_text;
}

} // namespace esgpv
