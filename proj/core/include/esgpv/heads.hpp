#pragma once

#include "esgpv/autograd.hpp"
#include "esgpv/corpus.hpp"
#include "esgpv/encoder.hpp"
#include "esgpv/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace esgpv {

struct PoolResult {
    ag::Value pooled;  // 1 x d
    ag::Value weights; // 1 x n, zero at masked positions, sums to 1
};

// Learned scoring vector turning per-token hidden states into a convex
// combination. Bias-free by default; the formula shows none.
class AttentionPooler {
public:
    AttentionPooler() = default;
    AttentionPooler(ag::ParamStore& store, const std::string& prefix, int dim, DetRng& init_rng,
                    bool with_bias = false);

    PoolResult pool(const ag::Value& hidden, const std::vector<int>& attention_mask) const;
    int dim() const { return dim_; }

private:
    ag::Value w_;
    ag::Value bias_; // null when bias-free
    int dim_ = 0;
};

// W2 GELU(LN(Dropout(W1 x))), applied in exactly that order.
class ClassifierHead {
public:
    ClassifierHead() = default;
    ClassifierHead(ag::ParamStore& store, const std::string& prefix, int in_dim, int mid_dim,
                   int n_classes, double dropout_rate, DetRng& init_rng);

    ag::Value forward(const ag::Value& x, ag::Mode mode, DetRng* rng) const;
    int in_dim() const { return in_dim_; }
    int n_classes() const { return n_classes_; }

private:
    ag::Value w1_, b1_, ln_gain_, ln_bias_, w2_, b2_;
    double dropout_rate_ = 0.1;
    int in_dim_ = 0;
    int n_classes_ = 0;
};

struct LossConfig {
    enum class Kind { CrossEntropy, Focal };

    double promise_weight = 0.6;
    double evidence_weight = 0.4;
    Kind kind = Kind::CrossEntropy;
    double focal_gamma = 2.0;
    std::optional<std::vector<double>> class_weights;

    // Warns (does not reject) when the task weights are overridden away
    // from a convex combination.
    void validate() const;
};

// Cross-entropy: -log p_gold. Focal: (1-p_gold)^gamma * (-log p_gold).
// Probabilities are clamped at 1e-12 before the log.
ag::Value task_loss(const ag::Value& logits, int gold, const LossConfig& config);
ag::Value combined_loss(const ag::Value& promise_loss, const ag::Value& evidence_loss,
                        const LossConfig& config);

// "[PAGE p] [SOURCE TAG] " + raw text; absent pages render as "?".
std::string enrich_context(const PromiseRecord& record);

// Plain-vector conveniences over the graph path.
struct PooledVector {
    Eigen::VectorXd pooled;
    Eigen::VectorXd weights;
};
PooledVector attention_pool(const EncodedSequence& seq, const AttentionPooler& pooler);
Eigen::VectorXd classify(const Eigen::VectorXd& pooled, const ClassifierHead& head,
                         ag::Mode mode, DetRng* rng = nullptr);
double task_loss_value(const Eigen::VectorXd& logits, int gold, const LossConfig& config);
Eigen::VectorXd softmax_vector(const Eigen::VectorXd& logits);

} // namespace esgpv
