#pragma once

#include <span>
#include <vector>

#include "risctl/common/error.hpp"
#include "risctl/common/rng.hpp"

namespace risctl::torus {

// Point on the N-torus embedded in R^{2N}: N consecutive 2-blocks, each a
// unit vector (cos theta_n, sin theta_n).
struct TorusPoint {
    std::vector<double> v;

    int blocks() const { return static_cast<int>(v.size()) / 2; }
    void validate(double tol = 1e-9) const;
};

// Tangent vector at some base point: every block orthogonal to the base
// point's block.
struct TangentVector {
    std::vector<double> v;
};

TorusPoint embed_phases(std::span<const double> theta);

// Blockwise x_n / ||x_n||. Throws SingularProjection on a zero-norm block.
TorusPoint project_torus(std::span<const double> x);

// Blockwise xi_n - (x_n . xi_n) x_n.
TangentVector project_tangent(const TorusPoint& x, std::span<const double> xi);

// theta_n = atan2(x_{n,2}, x_{n,1}) wrapped into [0, 2pi).
std::vector<double> recover_phases(const TorusPoint& x);

// Snap each angle to the nearest point of {2 pi k / 2^b}; exact ties go to
// the smaller grid index. 1 <= bits <= 8.
std::vector<double> quantize_phases(std::span<const double> theta, int bits);

// Von Mises draw via Best-Fisher rejection sampling; kappa = 0 degenerates
// to uniform on [0, 2pi). Deterministic under a seeded rng.
double sample_von_mises(double mu, double kappa, Rng& rng);

// Any angle to [0, 2pi).
double wrap_angle(double theta);

}  // namespace risctl::torus
