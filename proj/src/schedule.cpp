#include "risctl/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace risctl::diffusion {

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "vp") return ScheduleKind::vp;
    if (s == "linear") return ScheduleKind::linear;
    if (s == "cosine") return ScheduleKind::cosine;
    throw ConfigError("unknown schedule kind '" + s + "'");
}

std::string to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::vp: return "vp";
        case ScheduleKind::linear: return "linear";
        case ScheduleKind::cosine: return "cosine";
    }
    return "?";
}

void DiffusionSchedule::validate() const {
    require(steps >= 1, "DiffusionSchedule: steps must be >= 1");
    require(static_cast<int>(beta.size()) == steps &&
                static_cast<int>(alpha.size()) == steps &&
                static_cast<int>(alpha_bar.size()) == steps &&
                static_cast<int>(beta_tilde.size()) == steps,
            "DiffusionSchedule: coefficient lengths differ");
    require(eta >= 0.0, "DiffusionSchedule: eta must be >= 0");
    for (int k = 0; k < steps; ++k) {
        require(beta[k] > 0.0 && beta[k] < 1.0, "DiffusionSchedule: beta out of (0,1)");
        if (k > 0)
            require(alpha_bar[k] <= alpha_bar[k - 1] + 1e-15,
                    "DiffusionSchedule: alpha_bar not non-increasing");
    }
    require(beta_tilde[0] == 0.0, "DiffusionSchedule: beta_tilde[1] must be 0");
}

DiffusionSchedule build_schedule(ScheduleKind kind, int steps, double eta) {
    if (steps < 1) throw ContractViolation("build_schedule: steps must be >= 1");
    DiffusionSchedule s;
    s.steps = steps;
    s.kind = kind;
    s.eta = eta;
    s.beta.resize(steps);
    s.alpha.resize(steps);
    s.alpha_bar.resize(steps);
    s.beta_tilde.resize(steps);

    const double kBetaClip = 0.999;
    switch (kind) {
        case ScheduleKind::linear: {
            const double lo = 1e-4, hi = 0.2;
            for (int k = 0; k < steps; ++k)
                s.beta[k] =
                    steps == 1 ? lo : lo + (hi - lo) * k / double(steps - 1);
            break;
        }
        case ScheduleKind::cosine: {
            const double off = 0.008;
            auto abar = [&](double k) {
                const double t = (k / steps + off) / (1.0 + off) * M_PI / 2.0;
                const double t0 = off / (1.0 + off) * M_PI / 2.0;
                const double c = std::cos(t) / std::cos(t0);
                return c * c;
            };
            double prev = 1.0;
            for (int k = 1; k <= steps; ++k) {
                const double cur = abar(static_cast<double>(k));
                s.beta[k - 1] =
                    std::clamp(1.0 - cur / prev, 1e-8, kBetaClip);
                prev = cur;
            }
            break;
        }
        case ScheduleKind::vp: {
            const double bmin = 0.1, bmax = 20.0;
            for (int k = 1; k <= steps; ++k)
                s.beta[k - 1] = 1.0 - std::exp(-bmin / steps -
                                               (bmax - bmin) * (2.0 * k - 1.0) /
                                                   (2.0 * steps * steps));
            break;
        }
    }

    double prod = 1.0;
    for (int k = 0; k < steps; ++k) {
        s.alpha[k] = 1.0 - s.beta[k];
        prod *= s.alpha[k];
        s.alpha_bar[k] = prod;
    }
    s.beta_tilde[0] = 0.0;
    for (int k = 1; k < steps; ++k)
        s.beta_tilde[k] =
            s.beta[k] * (1.0 - s.alpha_bar[k - 1]) / (1.0 - s.alpha_bar[k]);
    s.validate();
    return s;
}

}  // namespace risctl::diffusion
