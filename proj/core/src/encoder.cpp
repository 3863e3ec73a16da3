#include "esgpv/encoder.hpp"

#include "esgpv/common.hpp"
#include "esgpv/textutil.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace esgpv {

namespace {

const char* kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

// Greedy longest-match wordpiece split of one lowercase word. Continuation
// pieces carry the "##" prefix. Single characters are always in the vocab,
// so segmentation terminates; unknown bytes map the whole word to [UNK].
std::vector<int> wordpiece(const std::string& word, const Vocabulary& vocab) {
    std::vector<int> ids;
    size_t start = 0;
    while (start < word.size()) {
        size_t end = word.size();
        int found = -1;
        while (end > start) {
            std::string piece = word.substr(start, end - start);
            if (start > 0) piece = "##" + piece;
            const int id = vocab.id(piece);
            if (id >= 0) {
                found = id;
                break;
            }
            --end;
        }
        if (found < 0) return {Vocabulary::kUnk};
        ids.push_back(found);
        start = end;
    }
    return ids;
}

} // namespace

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, size_t max_words) {
    std::map<std::string, size_t> counts;
    std::set<std::string> chars;
    for (const auto& text : texts) {
        for (const auto& word : word_tokens(text)) {
            ++counts[word];
            for (char c : word) chars.insert(std::string(1, c));
        }
    }

    std::vector<std::string> tokens(std::begin(kSpecials), std::end(kSpecials));
    for (const auto& c : chars) tokens.push_back(c);
    for (const auto& c : chars) tokens.push_back("##" + c);

    // Frequency order, ties lexicographic, caps the whole-word section.
    std::vector<std::pair<std::string, size_t>> words(counts.begin(), counts.end());
    std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::set<std::string> present(tokens.begin(), tokens.end());
    for (const auto& [word, count] : words) {
        if (tokens.size() >= max_words + std::size(kSpecials) + 2 * chars.size()) break;
        if (present.insert(word).second) tokens.push_back(word);
    }
    return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    for (size_t i = 0; i < v.tokens_.size(); ++i) {
        if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second) {
            throw ValidationError("duplicate vocabulary token: " + v.tokens_[i]);
        }
    }
    for (size_t i = 0; i < std::size(kSpecials); ++i) {
        if (i >= v.tokens_.size() || v.tokens_[i] != kSpecials[i]) {
            throw ValidationError("vocabulary must start with the special tokens");
        }
    }
    return v;
}

int Vocabulary::id(const std::string& piece) const {
    auto it = index_.find(piece);
    return it == index_.end() ? -1 : it->second;
}

TokenizedText tokenize(const std::string& text, const Vocabulary& vocab, int max_len) {
    if (trim(text).empty()) throw ValidationError("tokenize: text is empty");
    if (max_len < 3) throw ValidationError("tokenize: max_len must be at least 3");

    std::vector<int> ids{Vocabulary::kCls};
    for (const auto& word : word_tokens(text)) {
        for (int id : wordpiece(word, vocab)) {
            ids.push_back(id);
            if (static_cast<int>(ids.size()) == max_len - 1) break;
        }
        if (static_cast<int>(ids.size()) == max_len - 1) break;
    }
    ids.push_back(Vocabulary::kSep);

    TokenizedText out;
    out.token_ids = std::move(ids);
    out.attention_mask.assign(out.token_ids.size(), 1);
    return out;
}

ToyEncoder::ToyEncoder(const EncoderConfig& config, const Vocabulary& vocab,
                       ag::ParamStore& store, DetRng& init_rng)
    : config_(config), store_(&store) {
    if (config_.hidden_size <= 0 || config_.num_layers <= 0 || config_.num_heads <= 0) {
        throw ValidationError("toy encoder: sizes must be positive");
    }
    if (config_.hidden_size % config_.num_heads != 0) {
        throw ValidationError("toy encoder: hidden_size must divide evenly into heads");
    }
    head_dim_ = config_.hidden_size / config_.num_heads;

    const int d = config_.hidden_size;
    const int ffn = config_.effective_ffn();
    auto normal_init = [&init_rng] { return init_rng.normal(0.0, 0.02); };

    store.create("encoder.embed.token", static_cast<int>(vocab.size()), d, normal_init);
    store.create("encoder.embed.position", config_.max_len, d, normal_init);
    for (int layer = 1; layer <= config_.num_layers; ++layer) {
        const std::string p = "encoder.layer" + std::to_string(layer) + ".";
        store.create(p + "attn.wq", d, d, normal_init);
        store.zeros(p + "attn.bq", 1, d);
        store.create(p + "attn.wk", d, d, normal_init);
        store.zeros(p + "attn.bk", 1, d);
        store.create(p + "attn.wv", d, d, normal_init);
        store.zeros(p + "attn.bv", 1, d);
        store.create(p + "attn.wo", d, d, normal_init);
        store.zeros(p + "attn.bo", 1, d);
        store.ones(p + "ln1.gain", 1, d);
        store.zeros(p + "ln1.bias", 1, d);
        store.create(p + "ffn.w1", d, ffn, normal_init);
        store.zeros(p + "ffn.b1", 1, ffn);
        store.create(p + "ffn.w2", ffn, d, normal_init);
        store.zeros(p + "ffn.b2", 1, d);
        store.ones(p + "ln2.gain", 1, d);
        store.zeros(p + "ln2.bias", 1, d);
    }
}

ag::Value ToyEncoder::forward(const std::vector<int>& token_ids,
                              const std::vector<int>& attention_mask, ag::Mode mode,
                              DetRng* rng) {
    (void)mode;
    (void)rng; // the toy encoder has no dropout of its own
    if (token_ids.empty()) throw ValidationError("encode: empty sequence");
    if (token_ids.size() != attention_mask.size()) {
        throw ValidationError("encode: ids and mask lengths differ");
    }
    if (static_cast<int>(token_ids.size()) > config_.max_len) {
        throw ValidationError("encode: sequence longer than max_len");
    }

    const auto n = static_cast<int>(token_ids.size());
    auto& store = *store_;

    auto x = ag::gather_rows(store.get("encoder.embed.token"), token_ids);
    x = ag::add(x, ag::slice_rows(store.get("encoder.embed.position"), 0, n));

    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    for (int layer = 1; layer <= config_.num_layers; ++layer) {
        const std::string p = "encoder.layer" + std::to_string(layer) + ".";
        auto q = ag::add_rowvec(ag::matmul(x, store.get(p + "attn.wq")),
                                store.get(p + "attn.bq"));
        auto k = ag::add_rowvec(ag::matmul(x, store.get(p + "attn.wk")),
                                store.get(p + "attn.bk"));
        auto v = ag::add_rowvec(ag::matmul(x, store.get(p + "attn.wv")),
                                store.get(p + "attn.bv"));

        std::vector<ag::Value> contexts;
        contexts.reserve(static_cast<size_t>(config_.num_heads));
        for (int h = 0; h < config_.num_heads; ++h) {
            auto qh = ag::slice_cols(q, h * head_dim_, head_dim_);
            auto kh = ag::slice_cols(k, h * head_dim_, head_dim_);
            auto vh = ag::slice_cols(v, h * head_dim_, head_dim_);
            auto scores = ag::scale(ag::matmul(qh, ag::transpose(kh)), attn_scale);
            auto weights = ag::softmax_rows_masked(scores, attention_mask);
            contexts.push_back(ag::matmul(weights, vh));
        }
        auto attn_out = ag::add_rowvec(
            ag::matmul(ag::concat_cols(contexts), store.get(p + "attn.wo")),
            store.get(p + "attn.bo"));
        x = ag::layer_norm(ag::add(x, attn_out), store.get(p + "ln1.gain"),
                           store.get(p + "ln1.bias"));

        auto ffn = ag::gelu(ag::add_rowvec(ag::matmul(x, store.get(p + "ffn.w1")),
                                           store.get(p + "ffn.b1")));
        ffn = ag::add_rowvec(ag::matmul(ffn, store.get(p + "ffn.w2")),
                             store.get(p + "ffn.b2"));
        x = ag::layer_norm(ag::add(x, ffn), store.get(p + "ln2.gain"),
                           store.get(p + "ln2.bias"));
    }
    return x;
}

std::vector<std::string> ToyEncoder::layer_param_names(int layer) const {
    if (layer < 1 || layer > config_.num_layers) {
        throw InternalError("layer index out of range");
    }
    const std::string p = "encoder.layer" + std::to_string(layer) + ".";
    return {p + "attn.wq", p + "attn.bq", p + "attn.wk", p + "attn.bk",
            p + "attn.wv", p + "attn.bv", p + "attn.wo", p + "attn.bo",
            p + "ln1.gain", p + "ln1.bias", p + "ffn.w1", p + "ffn.b1",
            p + "ffn.w2",  p + "ffn.b2",  p + "ln2.gain", p + "ln2.bias"};
}

std::vector<std::string> ToyEncoder::base_param_names() const {
    return {"encoder.embed.token", "encoder.embed.position"};
}

namespace {

std::map<std::string, BackboneFactory>& backbone_registry() {
    static std::map<std::string, BackboneFactory> registry = {
        {"toy",
         [](const EncoderConfig& config, const Vocabulary& vocab, ag::ParamStore& store,
            DetRng& rng) -> std::unique_ptr<EncoderBackbone> {
             return std::make_unique<ToyEncoder>(config, vocab, store, rng);
         }},
    };
    return registry;
}

} // namespace

void register_backbone(const std::string& name, BackboneFactory factory) {
    backbone_registry()[name] = std::move(factory);
}

std::unique_ptr<EncoderBackbone> make_backbone(const EncoderConfig& config,
                                               const Vocabulary& vocab, ag::ParamStore& store,
                                               DetRng& init_rng) {
    auto& registry = backbone_registry();
    auto it = registry.find(config.backbone);
    if (it == registry.end()) {
        throw ValidationError("unknown encoder backbone '" + config.backbone +
                              "'; register it or use 'toy'");
    }
    return it->second(config, vocab, store, init_rng);
}

EncodedSequence encode(const std::vector<int>& token_ids,
                       const std::vector<int>& attention_mask, EncoderBackbone& encoder) {
    auto hidden = encoder.forward(token_ids, attention_mask, ag::Mode::Eval, nullptr);
    EncodedSequence out;
    out.hidden_states = hidden->val;
    out.attention_mask = attention_mask;
    out.token_ids = token_ids;
    return out;
}

FreezePartition apply_freezing(EncoderBackbone& encoder, ag::ParamStore& store,
                               int trainable_top_layers) {
    if (trainable_top_layers < 0 || trainable_top_layers > encoder.num_layers()) {
        throw ValidationError("trainable_top_layers must be in [0, " +
                              std::to_string(encoder.num_layers()) + "]");
    }
    std::set<std::string> frozen_names;
    for (const auto& name : encoder.base_param_names()) frozen_names.insert(name);
    const int first_trainable = encoder.num_layers() - trainable_top_layers + 1;
    for (int layer = 1; layer <= encoder.num_layers(); ++layer) {
        if (layer >= first_trainable) continue;
        for (const auto& name : encoder.layer_param_names(layer)) frozen_names.insert(name);
    }

    FreezePartition partition;
    for (const auto& [name, value] : store.items()) {
        const bool freeze = frozen_names.count(name) > 0;
        value->requires_grad = !freeze;
        (freeze ? partition.frozen : partition.trainable).push_back(name);
    }
    return partition;
}

} // namespace esgpv
