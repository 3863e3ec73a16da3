#include "esgpv/stemmer.hpp"

#include <algorithm>
#include <array>

namespace esgpv {

namespace {

// Classic Porter (1980). `b` holds the word, `k` the current end index.
struct Stem {
    std::string b;
    int k = 0; // index of last letter

    bool is_consonant(int i) const {
        switch (b[static_cast<size_t>(i)]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !is_consonant(i - 1);
        default:
            return true;
        }
    }

    // Measure of b[0..j]: the m in [C](VC)^m[V].
    int measure(int j) const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!is_consonant(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (is_consonant(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j) return n;
                if (!is_consonant(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem(int j) const {
        for (int i = 0; i <= j; ++i) {
            if (!is_consonant(i)) return true;
        }
        return false;
    }

    bool double_consonant(int j) const {
        if (j < 1) return false;
        if (b[static_cast<size_t>(j)] != b[static_cast<size_t>(j - 1)]) return false;
        return is_consonant(j);
    }

    // consonant-vowel-consonant ending where the final consonant is not
    // w, x or y (the "*o" condition).
    bool cvc(int i) const {
        if (i < 2 || !is_consonant(i) || is_consonant(i - 1) || !is_consonant(i - 2))
            return false;
        const char c = b[static_cast<size_t>(i)];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix) const {
        const int len = static_cast<int>(suffix.size());
        if (len > k + 1) return false;
        return b.compare(static_cast<size_t>(k + 1 - len), static_cast<size_t>(len),
                         suffix) == 0;
    }

    // Stem length (last index) with `suffix` removed; only valid after ends().
    int stem_end(std::string_view suffix) const { return k - static_cast<int>(suffix.size()); }

    void set_to(std::string_view replacement, int j) {
        b.resize(static_cast<size_t>(j + 1));
        b.append(replacement);
        k = static_cast<int>(b.size()) - 1;
    }

    // Replaces `suffix` by `replacement` when measure(stem) > m_min.
    bool replace(std::string_view suffix, std::string_view replacement, int m_min) {
        if (!ends(suffix)) return false;
        const int j = stem_end(suffix);
        if (measure(j) <= m_min) return true; // matched but condition failed: stop scanning
        set_to(replacement, j);
        return true;
    }
};

void step1ab(Stem& s) {
    if (s.ends("sses")) {
        s.set_to("ss", s.stem_end("sses"));
    } else if (s.ends("ies")) {
        s.set_to("i", s.stem_end("ies"));
    } else if (!s.ends("ss") && s.ends("s")) {
        s.set_to("", s.stem_end("s"));
    }

    bool rule2or3 = false;
    if (s.ends("eed")) {
        const int j = s.stem_end("eed");
        if (s.measure(j) > 0) s.set_to("ee", j);
    } else if (s.ends("ed") && s.vowel_in_stem(s.stem_end("ed"))) {
        s.set_to("", s.stem_end("ed"));
        rule2or3 = true;
    } else if (s.ends("ing") && s.vowel_in_stem(s.stem_end("ing"))) {
        s.set_to("", s.stem_end("ing"));
        rule2or3 = true;
    }
    if (rule2or3) {
        if (s.ends("at")) {
            s.set_to("ate", s.stem_end("at"));
        } else if (s.ends("bl")) {
            s.set_to("ble", s.stem_end("bl"));
        } else if (s.ends("iz")) {
            s.set_to("ize", s.stem_end("iz"));
        } else if (s.double_consonant(s.k)) {
            const char c = s.b[static_cast<size_t>(s.k)];
            if (c != 'l' && c != 's' && c != 'z') s.set_to("", s.k - 1);
        } else if (s.measure(s.k) == 1 && s.cvc(s.k)) {
            s.set_to("e", s.k);
        }
    }
}

void step1c(Stem& s) {
    if (s.ends("y") && s.vowel_in_stem(s.stem_end("y"))) {
        s.b[static_cast<size_t>(s.k)] = 'i';
    }
}

void step2(Stem& s) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 21> rules = {{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
        {"logi", "log"},
    }};
    for (const auto& [suffix, rep] : rules) {
        if (s.replace(suffix, rep, 0)) return;
    }
}

void step3(Stem& s) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 7> rules = {{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    for (const auto& [suffix, rep] : rules) {
        if (s.replace(suffix, rep, 0)) return;
    }
}

void step4(Stem& s) {
    static constexpr std::array<std::string_view, 19> suffixes = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
    };
    for (std::string_view suffix : suffixes) {
        if (!s.ends(suffix)) continue;
        const int j = s.stem_end(suffix);
        if (s.measure(j) <= 1) return;
        if (suffix == "ion") {
            const char c = j >= 0 ? s.b[static_cast<size_t>(j)] : '\0';
            if (c != 's' && c != 't') return;
        }
        s.set_to("", j);
        return;
    }
}

void step5(Stem& s) {
    if (s.ends("e")) {
        const int j = s.stem_end("e");
        const int m = s.measure(j);
        if (m > 1 || (m == 1 && !s.cvc(j))) s.set_to("", j);
    }
    if (s.b[static_cast<size_t>(s.k)] == 'l' && s.double_consonant(s.k) &&
        s.measure(s.k) > 1) {
        s.set_to("", s.k - 1);
    }
}

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    for (char c : word) {
        if (c < 'a' || c > 'z') return std::string(word);
    }
    Stem s;
    s.b = std::string(word);
    s.k = static_cast<int>(s.b.size()) - 1;
    step1ab(s);
    step1c(s);
    step2(s);
    step3(s);
    step4(s);
    step5(s);
    return s.b;
}

} // namespace esgpv
