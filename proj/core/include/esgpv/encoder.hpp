#pragma once

#include "esgpv/autograd.hpp"
#include "esgpv/rng.hpp"

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace esgpv {

// Wordpiece-lite vocabulary: specials, single characters (plus their "##"
// continuations) and frequent whole words. Ids are dense and stable.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;

    static Vocabulary build(const std::vector<std::string>& texts, size_t max_words = 2000);
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    int id(const std::string& piece) const;
    const std::vector<std::string>& tokens() const { return tokens_; }
    size_t size() const { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct TokenizedText {
    std::vector<int> token_ids;
    std::vector<int> attention_mask; // 1 = real token
};

// [CLS] pieces... [SEP], right-truncated to max_len so prepended tag and
// metadata blocks survive.
TokenizedText tokenize(const std::string& text, const Vocabulary& vocab, int max_len);

struct EncoderConfig {
    std::string backbone = "toy";
    std::string backbone_path; // local weights path for external adapters
    int max_len = 256;
    int hidden_size = 32;
    int num_layers = 2;
    int num_heads = 2;
    int ffn_size = 0; // 0 = 4 * hidden_size
    int trainable_top_layers = 2;
    size_t vocab_limit = 2000;

    int effective_ffn() const { return ffn_size > 0 ? ffn_size : 4 * hidden_size; }
};

// Per-token hidden states for one sequence.
struct EncodedSequence {
    ag::Mat hidden_states; // n x d
    std::vector<int> attention_mask;
    std::vector<int> token_ids;
};

// Sequence-encoder seam. The toy backbone is registered by default; an
// external pre-trained backbone plugs in through register_backbone.
class EncoderBackbone {
public:
    virtual ~EncoderBackbone() = default;
    virtual ag::Value forward(const std::vector<int>& token_ids,
                              const std::vector<int>& attention_mask, ag::Mode mode,
                              DetRng* rng) = 0;
    virtual int hidden_size() const = 0;
    virtual int num_layers() const = 0;
    // Parameter names owned by one encoder layer (1-based from the bottom)
    // and by the sub-layer base (embeddings).
    virtual std::vector<std::string> layer_param_names(int layer) const = 0;
    virtual std::vector<std::string> base_param_names() const = 0;
};

// 2-4 post-norm transformer layers over learned token + position
// embeddings. Deterministic in Eval mode.
class ToyEncoder final : public EncoderBackbone {
public:
    ToyEncoder(const EncoderConfig& config, const Vocabulary& vocab, ag::ParamStore& store,
               DetRng& init_rng);

    ag::Value forward(const std::vector<int>& token_ids,
                      const std::vector<int>& attention_mask, ag::Mode mode,
                      DetRng* rng) override;
    int hidden_size() const override { return config_.hidden_size; }
    int num_layers() const override { return config_.num_layers; }
    std::vector<std::string> layer_param_names(int layer) const override;
    std::vector<std::string> base_param_names() const override;

private:
    EncoderConfig config_;
    ag::ParamStore* store_;
    int head_dim_;
};

using BackboneFactory = std::function<std::unique_ptr<EncoderBackbone>(
    const EncoderConfig&, const Vocabulary&, ag::ParamStore&, DetRng&)>;

void register_backbone(const std::string& name, BackboneFactory factory);
std::unique_ptr<EncoderBackbone> make_backbone(const EncoderConfig& config,
                                               const Vocabulary& vocab, ag::ParamStore& store,
                                               DetRng& init_rng);

// Plain-matrix encode for inspection and tests: eval-mode forward.
EncodedSequence encode(const std::vector<int>& token_ids,
                       const std::vector<int>& attention_mask, EncoderBackbone& encoder);

struct FreezePartition {
    std::vector<std::string> frozen;
    std::vector<std::string> trainable;
};

// Freezes embeddings and all but the top `trainable_top_layers` encoder
// layers. Parameters outside the encoder stay trainable.
FreezePartition apply_freezing(EncoderBackbone& encoder, ag::ParamStore& store,
                               int trainable_top_layers);

} // namespace esgpv
