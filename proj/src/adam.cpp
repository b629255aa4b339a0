#include "risctl/nn/adam.hpp"

#include <cmath>

namespace risctl::nn {

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    require(lr > 0.0, "AdamOptimizer: lr must be positive");
}

void AdamOptimizer::step(const std::vector<ParamTensor*>& params) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, step_count_);
    const double bc2 = 1.0 - std::pow(beta2_, step_count_);
    for (ParamTensor* p : params) {
        if (!p->grad.all_finite())
            throw Error("adam_step: non-finite gradient in parameter '" +
                        p->name + "'");
        auto [it, inserted] = moments_.try_emplace(p);
        if (inserted) {
            it->second.m = Tensor(p->value.rows, p->value.cols);
            it->second.v = Tensor(p->value.rows, p->value.cols);
        }
        Tensor& m = it->second.m;
        Tensor& v = it->second.v;
        for (int i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data[i];
            m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * g;
            v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * g * g;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p->value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void AdamOptimizer::zero_grad(const std::vector<ParamTensor*>& params) {
    for (ParamTensor* p : params) p->zero_grad();
}

}  // namespace risctl::nn
