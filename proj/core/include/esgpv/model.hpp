#pragma once

#include "esgpv/encoder.hpp"
#include "esgpv/heads.hpp"
#include "esgpv/labels.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace esgpv {

// How record text is prepared before tokenization.
enum class InputKind {
    Raw,        // Model 1: text as-is
    Featurized, // Model 2: subtask tag block + text
    Context,    // Model 3: "[PAGE p] [TAG] " + text
};

const char* to_string(InputKind kind);
InputKind parse_input_kind(const std::string& name);

// Applies the transform. Featurized inputs reuse record.enriched_text when
// the featurize CLI already produced it.
std::string transform_text(InputKind kind, Subtask task, const PromiseRecord& record);

struct ModelConfig {
    EncoderConfig encoder;
    int head_mid_dim = 0; // 0 = encoder hidden size
    double head_dropout = 0.1;
    bool pooler_bias = false;
    LossConfig loss;
};

// Shared inference surface for single- and multi-head models.
class TextClassifier {
public:
    virtual ~TextClassifier() = default;
    // Per-task class probability vectors in eval mode.
    virtual std::map<Subtask, Eigen::VectorXd> predict(const std::string& text) = 0;
    virtual std::vector<Subtask> tasks() const = 0;
    virtual InputKind input_kind() const = 0;
    virtual const Vocabulary& vocab() const = 0;
    virtual const ModelConfig& config() const = 0;
    virtual ag::ParamStore& params() = 0;
    virtual EncoderBackbone& encoder() = 0;
    virtual uint64_t init_seed() const = 0;
};

// Model 3: shared encoder, attention pooling, dual heads over the same
// pooled representation.
class MultiTaskModel final : public TextClassifier {
public:
    MultiTaskModel(ModelConfig config, Vocabulary vocab, uint64_t seed);

    struct Output {
        ag::Value pooled;
        ag::Value weights;
        ag::Value promise_logits;
        ag::Value evidence_logits;
    };
    Output forward(const TokenizedText& input, ag::Mode mode, DetRng* rng);

    std::map<Subtask, Eigen::VectorXd> predict(const std::string& text) override;
    std::vector<Subtask> tasks() const override {
        return {Subtask::Promise, Subtask::Evidence};
    }
    InputKind input_kind() const override { return InputKind::Context; }
    const Vocabulary& vocab() const override { return vocab_; }
    const ModelConfig& config() const override { return config_; }
    ag::ParamStore& params() override { return store_; }
    EncoderBackbone& encoder() override { return *encoder_; }
    uint64_t init_seed() const override { return seed_; }

    const AttentionPooler& pooler() const { return pooler_; }
    const ClassifierHead& promise_head() const { return promise_head_; }
    const ClassifierHead& evidence_head() const { return evidence_head_; }

private:
    ModelConfig config_;
    Vocabulary vocab_;
    uint64_t seed_;
    ag::ParamStore store_;
    std::unique_ptr<EncoderBackbone> encoder_;
    AttentionPooler pooler_;
    ClassifierHead promise_head_;
    ClassifierHead evidence_head_;
};

// Models 1-2: one classifier head over the sequence-start representation.
class SingleTaskModel final : public TextClassifier {
public:
    SingleTaskModel(ModelConfig config, Subtask task, InputKind input, Vocabulary vocab,
                    uint64_t seed);

    ag::Value forward_logits(const TokenizedText& input, ag::Mode mode, DetRng* rng);

    std::map<Subtask, Eigen::VectorXd> predict(const std::string& text) override;
    std::vector<Subtask> tasks() const override { return {task_}; }
    InputKind input_kind() const override { return input_; }
    const Vocabulary& vocab() const override { return vocab_; }
    const ModelConfig& config() const override { return config_; }
    ag::ParamStore& params() override { return store_; }
    EncoderBackbone& encoder() override { return *encoder_; }
    uint64_t init_seed() const override { return seed_; }

    Subtask task() const { return task_; }
    const ClassifierHead& head() const { return head_; }

private:
    ModelConfig config_;
    Subtask task_;
    InputKind input_;
    Vocabulary vocab_;
    uint64_t seed_;
    ag::ParamStore store_;
    std::unique_ptr<EncoderBackbone> encoder_;
    ClassifierHead head_;
};

// Short parameter-namespace name: promise, evidence, clarity, timing.
const char* short_task_name(Subtask task);

} // namespace esgpv
