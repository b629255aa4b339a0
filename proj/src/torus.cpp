#include "risctl/torus/torus.hpp"

#include <cmath>

namespace risctl::torus {

double wrap_angle(double theta) {
    double t = std::fmod(theta, 2.0 * M_PI);
    if (t < 0.0) t += 2.0 * M_PI;
    if (t >= 2.0 * M_PI) t = 0.0;  // fmod edge at exactly 2pi
    return t;
}

void TorusPoint::validate(double tol) const {
    require(v.size() % 2 == 0, "TorusPoint: odd dimension");
    for (int b = 0; b < blocks(); ++b) {
        const double n = std::hypot(v[2 * b], v[2 * b + 1]);
        if (std::fabs(n - 1.0) > tol)
            throw ContractViolation("TorusPoint: block " + std::to_string(b) +
                                    " norm " + std::to_string(n));
    }
}

TorusPoint embed_phases(std::span<const double> theta) {
    TorusPoint p;
    p.v.resize(theta.size() * 2);
    for (size_t n = 0; n < theta.size(); ++n) {
        require(std::isfinite(theta[n]), "embed_phases: non-finite angle");
        p.v[2 * n] = std::cos(theta[n]);
        p.v[2 * n + 1] = std::sin(theta[n]);
    }
    return p;
}

TorusPoint project_torus(std::span<const double> x) {
    require(x.size() % 2 == 0, "project_torus: odd dimension");
    TorusPoint p;
    p.v.resize(x.size());
    for (size_t b = 0; b < x.size() / 2; ++b) {
        const double nx = x[2 * b], ny = x[2 * b + 1];
        const double r = std::sqrt(nx * nx + ny * ny);
        if (r == 0.0)
            throw SingularProjection("project_torus: zero-norm block " +
                                     std::to_string(b));
        p.v[2 * b] = nx / r;
        p.v[2 * b + 1] = ny / r;
    }
    return p;
}

TangentVector project_tangent(const TorusPoint& x, std::span<const double> xi) {
    require(xi.size() == x.v.size(), "project_tangent: dimension mismatch");
    TangentVector t;
    t.v.resize(xi.size());
    for (int b = 0; b < x.blocks(); ++b) {
        const double xa = x.v[2 * b], xb = x.v[2 * b + 1];
        const double ea = xi[2 * b], eb = xi[2 * b + 1];
        const double d = xa * ea + xb * eb;
        t.v[2 * b] = ea - d * xa;
        t.v[2 * b + 1] = eb - d * xb;
    }
    return t;
}

std::vector<double> recover_phases(const TorusPoint& x) {
    std::vector<double> theta(x.blocks());
    for (int b = 0; b < x.blocks(); ++b) {
        double t = std::atan2(x.v[2 * b + 1], x.v[2 * b]);
        if (t < 0.0) t += 2.0 * M_PI;
        theta[b] = t;
    }
    return theta;
}

std::vector<double> quantize_phases(std::span<const double> theta, int bits) {
    require(bits >= 1 && bits <= 8, "quantize_phases: bits must be in [1, 8]");
    const int levels = 1 << bits;
    const double step = 2.0 * M_PI / levels;
    std::vector<double> out(theta.size());
    for (size_t n = 0; n < theta.size(); ++n) {
        const double t = wrap_angle(theta[n]);
        // round-half-down so an exact tie snaps to the smaller index
        long k = static_cast<long>(std::ceil(t / step - 0.5));
        k = ((k % levels) + levels) % levels;
        out[n] = k * step;
    }
    return out;
}

double sample_von_mises(double mu, double kappa, Rng& rng) {
    require(kappa >= 0.0, "sample_von_mises: kappa must be >= 0");
    if (kappa < 1e-8) return rng.uniform(0.0, 2.0 * M_PI);

    // Best & Fisher (1979) wrapped-Cauchy envelope rejection
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);

    double f = 0.0;
    for (;;) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double z = std::cos(M_PI * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0) break;
        if (c <= 0.0) continue;
        if (std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double u3 = rng.uniform();
    const double theta = mu + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(f);
    return wrap_angle(theta);
}

}  // namespace risctl::torus
