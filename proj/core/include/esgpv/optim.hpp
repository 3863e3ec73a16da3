#pragma once

#include "esgpv/autograd.hpp"

#include <map>
#include <string>

namespace esgpv {

// Adaptive moments with decoupled weight decay. Frozen parameters
// (requires_grad == false) are skipped entirely, so their bytes never move.
class AdamW {
public:
    explicit AdamW(double weight_decay = 0.01, double beta1 = 0.9, double beta2 = 0.999,
                   double eps = 1e-8)
        : weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ag::ParamStore& params, double lr);
    void reset();

private:
    double weight_decay_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::map<std::string, ag::Mat> m_, v_;
};

// Linear warmup to `peak` over warmup_fraction of the budget, then cosine
// decay to zero at the final step. `step` is 1-based.
double lr_at(int64_t step, int64_t total_steps, double warmup_fraction, double peak);

} // namespace esgpv
