#pragma once

#include <unordered_map>
#include <vector>

#include "risctl/nn/tensor.hpp"

namespace risctl::nn {

// Adam with bias correction. Moment buffers persist across calls, keyed by
// parameter identity; a parameter's first step lazily allocates them.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8);

    // One update from accumulated gradients. Throws on a non-finite
    // gradient, naming the offending parameter.
    void step(const std::vector<ParamTensor*>& params);

    static void zero_grad(const std::vector<ParamTensor*>& params);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    struct Moments {
        Tensor m;
        Tensor v;
    };
    double lr_, beta1_, beta2_, eps_;
    long step_count_ = 0;
    std::unordered_map<ParamTensor*, Moments> moments_;
};

}  // namespace risctl::nn
