#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "risctl/nn/tensor.hpp"

namespace risctl::testutil {

// Central finite differences of a scalar-valued forward against every
// entry of every parameter; returns the maximum relative error against the
// accumulated analytic gradients. The forward must populate param->grad via
// one tape backward per call when `analytic` runs.
struct FdCheck {
    double eps = 1e-5;

    // `loss()` evaluates the scalar at the current parameter values without
    // touching grads.
    double max_rel_error(const std::vector<nn::ParamTensor*>& params,
                         const std::function<double()>& loss,
                         const std::function<void()>& compute_grads) {
        for (auto* p : params) p->zero_grad();
        compute_grads();
        double worst = 0.0;
        for (auto* p : params) {
            for (int i = 0; i < p->value.size(); ++i) {
                const double keep = p->value.data[i];
                p->value.data[i] = keep + eps;
                const double up = loss();
                p->value.data[i] = keep - eps;
                const double down = loss();
                p->value.data[i] = keep;
                const double fd = (up - down) / (2.0 * eps);
                const double an = p->grad.data[i];
                const double denom =
                    std::max({std::fabs(fd), std::fabs(an), 1e-6});
                worst = std::max(worst, std::fabs(fd - an) / denom);
            }
        }
        return worst;
    }
};

}  // namespace risctl::testutil
