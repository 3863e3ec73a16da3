#include "esgpv/model.hpp"

#include "esgpv/common.hpp"
#include "esgpv/featurizer.hpp"

namespace esgpv {

const char* to_string(InputKind kind) {
    switch (kind) {
    case InputKind::Raw:
        return "raw";
    case InputKind::Featurized:
        return "featurized";
    case InputKind::Context:
        return "context";
    }
    throw InternalError("unknown input kind");
}

InputKind parse_input_kind(const std::string& name) {
    if (name == "raw") return InputKind::Raw;
    if (name == "featurized") return InputKind::Featurized;
    if (name == "context") return InputKind::Context;
    throw ValidationError("unknown input kind '" + name + "'");
}

std::string transform_text(InputKind kind, Subtask task, const PromiseRecord& record) {
    switch (kind) {
    case InputKind::Raw:
        return record.raw_text;
    case InputKind::Featurized: {
        if (record.enriched_text) {
            const auto detected = detect_tag_prefix(*record.enriched_text);
            if (!detected || detected->first != task) {
                throw ValidationError("record '" + record.id +
                                      "': enriched_text does not start with a " +
                                      short_task_name(task) + " tag block");
            }
            return *record.enriched_text;
        }
        const auto annotation = featurize(task, record.raw_text, LexiconSet::builtin(),
                                          default_sentiment_scorer(),
                                          default_entity_detector());
        return enrich(record, annotation);
    }
    case InputKind::Context:
        return enrich_context(record);
    }
    throw InternalError("unknown input kind");
}

const char* short_task_name(Subtask task) {
    switch (task) {
    case Subtask::Promise:
        return "promise";
    case Subtask::Evidence:
        return "evidence";
    case Subtask::Clarity:
        return "clarity";
    case Subtask::Timing:
        return "timing";
    }
    throw InternalError("unknown subtask");
}

MultiTaskModel::MultiTaskModel(ModelConfig config, Vocabulary vocab, uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)), seed_(seed) {
    DetRng init_rng(splitmix64(seed));
    encoder_ = make_backbone(config_.encoder, vocab_, store_, init_rng);
    const int d = encoder_->hidden_size();
    const int mid = config_.head_mid_dim > 0 ? config_.head_mid_dim : d;
    pooler_ = AttentionPooler(store_, "pooler.", d, init_rng, config_.pooler_bias);
    promise_head_ = ClassifierHead(store_, "head.promise.", d, mid,
                                   class_count(Subtask::Promise), config_.head_dropout,
                                   init_rng);
    evidence_head_ = ClassifierHead(store_, "head.evidence.", d, mid,
                                    class_count(Subtask::Evidence), config_.head_dropout,
                                    init_rng);
}

MultiTaskModel::Output MultiTaskModel::forward(const TokenizedText& input, ag::Mode mode,
                                               DetRng* rng) {
    auto hidden = encoder_->forward(input.token_ids, input.attention_mask, mode, rng);
    auto pooled = pooler_.pool(hidden, input.attention_mask);
    // Both heads consume the very same pooled node: one encoder pass.
    return {pooled.pooled, pooled.weights,
            promise_head_.forward(pooled.pooled, mode, rng),
            evidence_head_.forward(pooled.pooled, mode, rng)};
}

std::map<Subtask, Eigen::VectorXd> MultiTaskModel::predict(const std::string& text) {
    const auto input = tokenize(text, vocab_, config_.encoder.max_len);
    auto out = forward(input, ag::Mode::Eval, nullptr);
    return {{Subtask::Promise, softmax_vector(out.promise_logits->val.row(0).transpose())},
            {Subtask::Evidence, softmax_vector(out.evidence_logits->val.row(0).transpose())}};
}

SingleTaskModel::SingleTaskModel(ModelConfig config, Subtask task, InputKind input,
                                 Vocabulary vocab, uint64_t seed)
    : config_(std::move(config)), task_(task), input_(input), vocab_(std::move(vocab)),
      seed_(seed) {
    DetRng init_rng(splitmix64(seed));
    encoder_ = make_backbone(config_.encoder, vocab_, store_, init_rng);
    const int d = encoder_->hidden_size();
    const int mid = config_.head_mid_dim > 0 ? config_.head_mid_dim : d;
    head_ = ClassifierHead(store_, std::string("head.") + short_task_name(task) + ".", d, mid,
                           class_count(task), config_.head_dropout, init_rng);
}

ag::Value SingleTaskModel::forward_logits(const TokenizedText& input, ag::Mode mode,
                                          DetRng* rng) {
    auto hidden = encoder_->forward(input.token_ids, input.attention_mask, mode, rng);
    auto cls = ag::slice_rows(hidden, 0, 1); // sequence-start representation
    return head_.forward(cls, mode, rng);
}

std::map<Subtask, Eigen::VectorXd> SingleTaskModel::predict(const std::string& text) {
    const auto input = tokenize(text, vocab_, config_.encoder.max_len);
    auto logits = forward_logits(input, ag::Mode::Eval, nullptr);
    return {{task_, softmax_vector(logits->val.row(0).transpose())}};
}

} // namespace esgpv
