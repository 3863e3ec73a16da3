#pragma once

#include "esgpv/lexicon.hpp"

#include <string>

namespace esgpv {

enum class Polarity { Negative = 0, Positive = 1 };

// Pluggable polarity seam; a statistical sentiment model can sit behind
// this interface in a full-scale deployment.
class SentimentScorer {
public:
    virtual ~SentimentScorer() = default;
    virtual Polarity score(const std::string& text) const = 0;
};

// Signed-lexicon vote. Ties go POSITIVE: promises skew positive.
class LexiconSentimentScorer final : public SentimentScorer {
public:
    LexiconSentimentScorer(const Lexicon& positive, const Lexicon& negative)
        : positive_(&positive), negative_(&negative) {}
    Polarity score(const std::string& text) const override;

private:
    const Lexicon* positive_;
    const Lexicon* negative_;
};

const SentimentScorer& default_sentiment_scorer();

} // namespace esgpv
