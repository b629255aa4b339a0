#pragma once

#include <string>
#include <vector>

#include "risctl/common/error.hpp"

namespace risctl::diffusion {

enum class ScheduleKind { vp, linear, cosine };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind k);

// Per-step coefficients of the guided reverse chain. 1-based step k is
// stored at index k-1. alpha_bar is the running product of alpha and
// beta_tilde[0] is exactly zero.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    std::vector<double> beta_tilde;
    double eta = 0.1;  // guidance weight
    ScheduleKind kind = ScheduleKind::cosine;

    void validate() const;
};

// linear: beta spaced over [1e-4, 0.2]
// cosine: alpha_bar_k = cos^2(((k/T + s)/(1+s)) pi/2) / cos^2(s pi / (2(1+s))),
//         s = 0.008, beta derived and clipped below 1
// vp:     beta_k = 1 - exp(-bmin/T - (bmax-bmin)(2k-1)/(2T^2)),
//         bmin = 0.1, bmax = 20
DiffusionSchedule build_schedule(ScheduleKind kind, int steps, double eta = 0.1);

}  // namespace risctl::diffusion
