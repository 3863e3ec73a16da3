#include "esgpv/lexicon.hpp"

#include "esgpv/common.hpp"
#include "esgpv/stemmer.hpp"
#include "esgpv/textutil.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace esgpv {

namespace {

constexpr std::string_view kYearPlaceholder = "<year>";

struct BuiltinFile {
    const char* path;
    const char* text;
};

const BuiltinFile kBuiltinFiles[] = {
#include "lexicon_data.inc"
};

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::stringstream ss{std::string(text)};
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

const BuiltinFile& builtin_file(const std::string& rel_path) {
    for (const auto& f : kBuiltinFiles) {
        if (rel_path == f.path) return f;
    }
    throw InternalError("missing builtin lexicon: " + rel_path);
}

Lexicon builtin_lexicon(const std::string& rel_path) {
    const auto& f = builtin_file(rel_path);
    const auto stem_name = std::filesystem::path(rel_path).stem().string();
    return Lexicon::from_lines(stem_name, split_lines(f.text));
}

} // namespace

Lexicon::Lexicon(std::string name, MatchMode mode, std::vector<std::string> entries)
    : name_(std::move(name)), mode_(mode) {
    std::set<std::string> seen;
    for (auto& raw : entries) {
        std::string entry = to_lower(trim(raw));
        if (entry.empty()) throw ValidationError("lexicon '" + name_ + "': empty entry");
        if (!seen.insert(entry).second) {
            throw ValidationError("lexicon '" + name_ + "': duplicate entry '" + entry + "'");
        }
        CompiledEntry compiled;
        // The placeholder survives tokenization as-is.
        std::string normalized = entry;
        size_t pos;
        std::map<size_t, bool> placeholder_at;
        std::vector<std::string> parts;
        {
            std::string tmp = normalized;
            while ((pos = tmp.find(kYearPlaceholder)) != std::string::npos) {
                tmp.replace(pos, kYearPlaceholder.size(), " yearplaceholder ");
            }
            parts = word_tokens(tmp);
        }
        for (auto& tok : parts) {
            if (tok == "yearplaceholder") {
                compiled.tokens.emplace_back(kYearPlaceholder);
            } else {
                compiled.tokens.push_back(mode_ == MatchMode::StemmedToken ? porter_stem(tok)
                                                                           : tok);
            }
        }
        if (compiled.tokens.empty()) {
            throw ValidationError("lexicon '" + name_ + "': entry '" + entry +
                                  "' has no word tokens");
        }
        entries_.push_back(std::move(entry));
        compiled_.push_back(std::move(compiled));
    }
}

Lexicon Lexicon::from_lines(std::string name, const std::vector<std::string>& lines) {
    MatchMode mode = MatchMode::StemmedToken;
    std::vector<std::string> entries;
    for (const auto& raw : lines) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string lowered = to_lower(line);
            if (lowered.rfind("# mode:", 0) == 0) {
                const std::string value = trim(lowered.substr(7));
                if (value == "phrase") mode = MatchMode::Phrase;
                else if (value == "stemmed-token") mode = MatchMode::StemmedToken;
                else
                    throw ValidationError("lexicon '" + name + "': unknown mode '" + value +
                                          "'");
            }
            continue;
        }
        entries.push_back(line);
    }
    return Lexicon(std::move(name), mode, std::move(entries));
}

Lexicon Lexicon::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open lexicon file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return from_lines(path.stem().string(), lines);
}

int Lexicon::count_matches(const std::vector<std::string>& raw_tokens,
                           const std::vector<std::string>& stemmed_tokens) const {
    const auto& tokens = mode_ == MatchMode::StemmedToken ? stemmed_tokens : raw_tokens;
    int total = 0;
    for (const auto& entry : compiled_) {
        const size_t len = entry.tokens.size();
        if (len == 0 || len > tokens.size()) continue;
        size_t i = 0;
        while (i + len <= tokens.size()) {
            bool match = true;
            for (size_t j = 0; j < len; ++j) {
                const std::string& want = entry.tokens[j];
                if (want == kYearPlaceholder) {
                    // Placeholder checks the raw token even in stemmed mode.
                    if (!is_year_token(raw_tokens[i + j])) {
                        match = false;
                        break;
                    }
                } else if (tokens[i + j] != want) {
                    match = false;
                    break;
                }
            }
            if (match) {
                ++total;
                i += len; // multiword matches do not overlap
            } else {
                ++i;
            }
        }
    }
    return total;
}

bool Lexicon::any_match(const std::vector<std::string>& raw_tokens,
                        const std::vector<std::string>& stemmed_tokens) const {
    return count_matches(raw_tokens, stemmed_tokens) > 0;
}

const LexiconSet& LexiconSet::builtin() {
    static const LexiconSet set = [] {
        LexiconSet s;
        s.promise_words = builtin_lexicon("promise/promise_words.txt");
        s.positive_sentiment = builtin_lexicon("promise/positive_sentiment.txt");
        s.negative_sentiment = builtin_lexicon("promise/negative_sentiment.txt");
        s.metric_terms = builtin_lexicon("evidence/metric_terms.txt");
        s.proof_terms = builtin_lexicon("evidence/proof_terms.txt");
        s.vague_terms = builtin_lexicon("clarity/vague_terms.txt");
        s.specific_terms = builtin_lexicon("clarity/specific_terms.txt");
        s.horizons[0] = builtin_lexicon("timing/within_2_years.txt");
        s.horizons[1] = builtin_lexicon("timing/two_to_five_years.txt");
        s.horizons[2] = builtin_lexicon("timing/beyond_five_years.txt");
        s.horizons[3] = builtin_lexicon("timing/other.txt");
        return s;
    }();
    return set;
}

LexiconSet LexiconSet::load_dir(const std::filesystem::path& dir) {
    auto load = [&](const char* rel) { return Lexicon::load_file(dir / rel); };
    LexiconSet s;
    s.promise_words = load("promise/promise_words.txt");
    s.positive_sentiment = load("promise/positive_sentiment.txt");
    s.negative_sentiment = load("promise/negative_sentiment.txt");
    s.metric_terms = load("evidence/metric_terms.txt");
    s.proof_terms = load("evidence/proof_terms.txt");
    s.vague_terms = load("clarity/vague_terms.txt");
    s.specific_terms = load("clarity/specific_terms.txt");
    s.horizons[0] = load("timing/within_2_years.txt");
    s.horizons[1] = load("timing/two_to_five_years.txt");
    s.horizons[2] = load("timing/beyond_five_years.txt");
    s.horizons[3] = load("timing/other.txt");
    return s;
}

} // namespace esgpv
