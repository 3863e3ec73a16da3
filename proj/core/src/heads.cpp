#include "esgpv/heads.hpp"

#include "esgpv/common.hpp"

#include <cmath>

namespace esgpv {

AttentionPooler::AttentionPooler(ag::ParamStore& store, const std::string& prefix, int dim,
                                 DetRng& init_rng, bool with_bias)
    : dim_(dim) {
    w_ = store.create(prefix + "w", dim, 1, [&init_rng] { return init_rng.normal(0.0, 0.02); });
    if (with_bias) bias_ = store.zeros(prefix + "b", 1, 1);
}

PoolResult AttentionPooler::pool(const ag::Value& hidden,
                                 const std::vector<int>& attention_mask) const {
    if (hidden->val.cols() != dim_) {
        throw ValidationError("attention pooler: hidden size " +
                              std::to_string(hidden->val.cols()) + " does not match d=" +
                              std::to_string(dim_));
    }
    if (hidden->val.rows() != static_cast<Eigen::Index>(attention_mask.size())) {
        throw ValidationError("attention pooler: mask length mismatch");
    }
    bool any = false;
    for (int m : attention_mask) any = any || (m != 0);
    if (!any) throw ValidationError("attention pooler: all positions are masked");

    auto scores = ag::matmul(hidden, w_); // n x 1
    if (bias_) scores = ag::add_rowvec(scores, bias_);
    auto weights = ag::softmax_rows_masked(ag::transpose(scores), attention_mask); // 1 x n
    return {ag::matmul(weights, hidden), weights};
}

ClassifierHead::ClassifierHead(ag::ParamStore& store, const std::string& prefix, int in_dim,
                               int mid_dim, int n_classes, double dropout_rate,
                               DetRng& init_rng)
    : dropout_rate_(dropout_rate), in_dim_(in_dim), n_classes_(n_classes) {
    if (mid_dim <= 0) mid_dim = in_dim;
    auto init = [&init_rng] { return init_rng.normal(0.0, 0.02); };
    w1_ = store.create(prefix + "w1", in_dim, mid_dim, init);
    b1_ = store.zeros(prefix + "b1", 1, mid_dim);
    ln_gain_ = store.ones(prefix + "ln.gain", 1, mid_dim);
    ln_bias_ = store.zeros(prefix + "ln.bias", 1, mid_dim);
    w2_ = store.create(prefix + "w2", mid_dim, n_classes, init);
    b2_ = store.zeros(prefix + "b2", 1, n_classes);
}

ag::Value ClassifierHead::forward(const ag::Value& x, ag::Mode mode, DetRng* rng) const {
    if (x->val.cols() != in_dim_) {
        throw ValidationError("classifier head: input dimension " +
                              std::to_string(x->val.cols()) + " does not match d=" +
                              std::to_string(in_dim_));
    }
    auto h = ag::add_rowvec(ag::matmul(x, w1_), b1_);
    h = ag::dropout(h, dropout_rate_, mode, rng);
    h = ag::layer_norm(h, ln_gain_, ln_bias_);
    h = ag::gelu(h);
    return ag::add_rowvec(ag::matmul(h, w2_), b2_);
}

void LossConfig::validate() const {
    if (std::abs(promise_weight + evidence_weight - 1.0) > 1e-9) {
        warn("task weights " + std::to_string(promise_weight) + " + " +
             std::to_string(evidence_weight) + " do not sum to 1");
    }
    if (focal_gamma < 0.0) throw ValidationError("focal_gamma must be >= 0");
}

ag::Value task_loss(const ag::Value& logits, int gold, const LossConfig& config) {
    if (logits->val.rows() != 1) throw InternalError("task_loss: logits must be 1 x C");
    const auto n_classes = static_cast<int>(logits->val.cols());
    if (gold < 0 || gold >= n_classes) {
        throw ValidationError("gold label " + std::to_string(gold) + " out of range [0, " +
                              std::to_string(n_classes) + ")");
    }
    const std::vector<int> full_mask(static_cast<size_t>(n_classes), 1);
    auto probs = ag::softmax_rows_masked(logits, full_mask);
    auto p_gold = ag::pick(probs, 0, gold);
    auto loss = ag::scale(ag::log_clamped(p_gold, 1e-12), -1.0);
    if (config.kind == LossConfig::Kind::Focal) {
        auto one_minus_p = ag::add_scalar(ag::scale(p_gold, -1.0), 1.0);
        loss = ag::cmul(ag::pow_const(one_minus_p, config.focal_gamma), loss);
    }
    if (config.class_weights) {
        if (static_cast<int>(config.class_weights->size()) != n_classes) {
            throw ValidationError("class_weights size does not match class count");
        }
        loss = ag::scale(loss, (*config.class_weights)[static_cast<size_t>(gold)]);
    }
    return loss;
}

ag::Value combined_loss(const ag::Value& promise_loss, const ag::Value& evidence_loss,
                        const LossConfig& config) {
    if (!std::isfinite(promise_loss->val(0, 0)) || !std::isfinite(evidence_loss->val(0, 0))) {
        throw ValidationError("combined_loss: non-finite component loss");
    }
    return ag::axpby(config.promise_weight, promise_loss, config.evidence_weight,
                     evidence_loss);
}

std::string enrich_context(const PromiseRecord& record) {
    const std::string page =
        record.page_number ? std::to_string(*record.page_number) : std::string("?");
    return "[PAGE " + page + "] [" + record.source_tag + "] " + record.raw_text;
}

PooledVector attention_pool(const EncodedSequence& seq, const AttentionPooler& pooler) {
    auto hidden = ag::constant(seq.hidden_states);
    auto result = pooler.pool(hidden, seq.attention_mask);
    return {result.pooled->val.row(0).transpose(), result.weights->val.row(0).transpose()};
}

Eigen::VectorXd classify(const Eigen::VectorXd& pooled, const ClassifierHead& head,
                         ag::Mode mode, DetRng* rng) {
    auto x = ag::constant(pooled.transpose());
    return head.forward(x, mode, rng)->val.row(0).transpose();
}

double task_loss_value(const Eigen::VectorXd& logits, int gold, const LossConfig& config) {
    auto value = task_loss(ag::constant(logits.transpose()), gold, config);
    return value->val(0, 0);
}

Eigen::VectorXd softmax_vector(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd exps = (logits.array() - m).exp();
    return exps / exps.sum();
}

} // namespace esgpv
