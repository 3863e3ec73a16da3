#include "esgpv/optim.hpp"

#include "esgpv/common.hpp"

#include <cmath>

namespace esgpv {

void AdamW::step(ag::ParamStore& params, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const auto& [name, value] : params.items()) {
        if (!value->requires_grad) continue;
        value->ensure_grad();
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.size() == 0) {
            m = ag::Mat::Zero(value->val.rows(), value->val.cols());
            v = ag::Mat::Zero(value->val.rows(), value->val.cols());
        }
        m = beta1_ * m + (1.0 - beta1_) * value->grad;
        v = beta2_ * v + (1.0 - beta2_) * value->grad.cwiseProduct(value->grad);
        const ag::Mat m_hat = m / bc1;
        const ag::Mat v_hat = v / bc2;
        value->val -=
            lr * (m_hat.array() / (v_hat.array().sqrt() + eps_)).matrix();
        if (weight_decay_ != 0.0) value->val -= lr * weight_decay_ * value->val;
    }
}

void AdamW::reset() {
    t_ = 0;
    m_.clear();
    v_.clear();
}

double lr_at(int64_t step, int64_t total_steps, double warmup_fraction, double peak) {
    if (total_steps <= 0) throw InternalError("lr_at: total_steps must be positive");
    if (step < 1) step = 1;
    if (step > total_steps) step = total_steps;
    const auto warmup_steps =
        static_cast<int64_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
    if (warmup_steps > 0 && step <= warmup_steps) {
        return peak * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    if (total_steps == warmup_steps) return peak;
    const double progress = static_cast<double>(step - warmup_steps) /
                            static_cast<double>(total_steps - warmup_steps);
    return peak * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

} // namespace esgpv
