#pragma once

#include <complex>
#include <span>
#include <vector>

#include "risctl/common/error.hpp"
#include "risctl/common/vec.hpp"

namespace risctl::channel {

using cplx = std::complex<double>;
using risctl::distance;
using risctl::Vec2;

// Static geometry and radio constants of a deployment. Planar, meters.
struct Scene {
    Vec2 bs_pos{0.0, 0.0};
    std::vector<Vec2> ris_pos;
    double wavelength = 0.0857;     // 3.5 GHz carrier
    double pathloss_exp = 2.0;
    double tx_power = 1.0;          // W
    double noise_power = 1e-12;     // W
    int elements_per_ris = 1;
    // Optional cos(incidence) amplitude factor on the user->RIS link,
    // measured against a boresight normal pointing at the BS. Disabled by
    // default; there is no agreed closed form for the roll-off.
    bool incidence_efficiency = false;

    int num_ris() const { return static_cast<int>(ris_pos.size()); }
    void validate() const;

    // R positions uniformly on a circle around a center point.
    static std::vector<Vec2> ring_positions(const Vec2& center, double radius,
                                            int count);
};

// Complex channel set for one control interval: direct links plus the
// per-RIS scalar reflection coefficients for the target and each interferer.
struct CsiSnapshot {
    cplx h_l;                             // target -> BS
    std::vector<cplx> h_m;                // interferer m -> BS
    std::vector<cplx> h_i;                // RIS i -> BS
    std::vector<cplx> h_li;               // target -> RIS i
    std::vector<std::vector<cplx>> h_mi;  // [i][m] interferer m -> RIS i

    int num_ris() const { return static_cast<int>(h_i.size()); }
    int num_interferers() const { return static_cast<int>(h_m.size()); }
    void validate() const;
};

// Per-element phase shifts in [0, 2pi), R x N row-major.
struct PhaseConfig {
    int num_ris = 0;
    int elements = 0;
    std::vector<double> theta;

    PhaseConfig() = default;
    PhaseConfig(int r, int n)
        : num_ris(r), elements(n), theta(static_cast<size_t>(r) * n, 0.0) {}

    double& at(int i, int n) { return theta[static_cast<size_t>(i) * elements + n]; }
    double at(int i, int n) const {
        return theta[static_cast<size_t>(i) * elements + n];
    }
    std::span<const double> row(int i) const {
        return {theta.data() + static_cast<size_t>(i) * elements,
                static_cast<size_t>(elements)};
    }
};

// Binary ON/OFF state per RIS.
struct RisActivation {
    std::vector<int> v;

    static RisActivation all_on(int r) { return {std::vector<int>(r, 1)}; }
    static RisActivation all_off(int r) { return {std::vector<int>(r, 0)}; }
};

// LoS coefficient d^{-alpha/2} exp(-j 2 pi d / lambda). Throws on d <= 0.
cplx channel_coefficient(double d, const Scene& scene);

// Builds the full snapshot for given target/interferer positions.
// Throws DegenerateGeometry on coincident positions.
CsiSnapshot snapshot_from_positions(const Vec2& target,
                                    const std::vector<Vec2>& interferers,
                                    const Scene& scene);

// Per-RIS coherent element sum S = sum_n exp(j theta_n); |S| <= N.
cplx ris_sum_factor(std::span<const double> theta_row);

// SINR of the target user. The interference sum is coherent: the
// denominator is |sum over interferers|^2, not a sum of squares.
double sinr(const CsiSnapshot& csi, const PhaseConfig& phases,
            const RisActivation& act, const Scene& scene);

// Same SINR with the per-RIS element sums substituted directly; the rate
// depends on phases only through these sums.
double sinr_from_sums(const CsiSnapshot& csi, const RisActivation& act,
                      const Scene& scene, std::span<const cplx> sums);

enum class RateMode { on_config, all_off };

// log2(1 + SINR); all_off evaluates with every RIS forced off.
double achievable_rate(const CsiSnapshot& csi, const PhaseConfig& phases,
                       const RisActivation& act, const Scene& scene,
                       RateMode mode);

// Exact gradient of the all-v-as-given achievable rate with respect to
// every element phase, (R x N) flattened row-major.
std::vector<double> reward_phase_gradient(const CsiSnapshot& csi,
                                          const PhaseConfig& phases,
                                          const RisActivation& act,
                                          const Scene& scene);

}  // namespace risctl::channel
