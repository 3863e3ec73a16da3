#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace esgpv {

enum class MatchMode { StemmedToken, Phrase };

// A term list matched against tokenized text. StemmedToken entries compare
// token stems; Phrase entries compare raw lowercase tokens. Multiword
// entries match consecutive token runs without overlap. The placeholder
// "<year>" matches any calendar year 1900-2099.
class Lexicon {
public:
    Lexicon() = default;
    Lexicon(std::string name, MatchMode mode, std::vector<std::string> entries);

    // File format: one term per line, UTF-8, '#' comments. A leading
    // "# mode: phrase" comment switches the match mode.
    static Lexicon from_lines(std::string name, const std::vector<std::string>& lines);
    static Lexicon load_file(const std::filesystem::path& path);

    const std::string& name() const { return name_; }
    MatchMode match_mode() const { return mode_; }
    const std::vector<std::string>& entries() const { return entries_; }

    // Total matches with multiplicity against a pre-tokenized text.
    int count_matches(const std::vector<std::string>& raw_tokens,
                      const std::vector<std::string>& stemmed_tokens) const;
    bool any_match(const std::vector<std::string>& raw_tokens,
                   const std::vector<std::string>& stemmed_tokens) const;

private:
    struct CompiledEntry {
        std::vector<std::string> tokens; // stemmed for StemmedToken mode
    };

    std::string name_;
    MatchMode mode_ = MatchMode::StemmedToken;
    std::vector<std::string> entries_;
    std::vector<CompiledEntry> compiled_;
};

// The shipped lexicon bundle backing the four featurizers.
struct LexiconSet {
    Lexicon promise_words;
    Lexicon positive_sentiment;
    Lexicon negative_sentiment;
    Lexicon metric_terms;
    Lexicon proof_terms;
    Lexicon vague_terms;
    Lexicon specific_terms;
    std::array<Lexicon, 4> horizons; // within-2, 2-5, beyond-5, other

    // Embedded copy of core/lexicons (the version golden tests pin).
    static const LexiconSet& builtin();

    // Loads the same layout from a directory: <subtask>/<name>.txt.
    static LexiconSet load_dir(const std::filesystem::path& dir);
};

} // namespace esgpv
