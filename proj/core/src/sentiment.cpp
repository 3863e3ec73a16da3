#include "esgpv/sentiment.hpp"

#include "esgpv/stemmer.hpp"
#include "esgpv/textutil.hpp"

namespace esgpv {

Polarity LexiconSentimentScorer::score(const std::string& text) const {
    const auto raw = word_tokens(text);
    std::vector<std::string> stemmed;
    stemmed.reserve(raw.size());
    for (const auto& t : raw) stemmed.push_back(porter_stem(t));
    const int pos = positive_->count_matches(raw, stemmed);
    const int neg = negative_->count_matches(raw, stemmed);
    return pos >= neg ? Polarity::Positive : Polarity::Negative;
}

const SentimentScorer& default_sentiment_scorer() {
    static const LexiconSentimentScorer scorer(LexiconSet::builtin().positive_sentiment,
                                               LexiconSet::builtin().negative_sentiment);
    return scorer;
}

} // namespace esgpv
