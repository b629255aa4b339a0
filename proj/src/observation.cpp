#include "risctl/diffusion/observation.hpp"

#include <cmath>

namespace risctl::diffusion {

Observation make_observation(const channel::CsiSnapshot& csi,
                             const channel::Scene& scene) {
    csi.validate();
    const int R = csi.num_ris();
    const double ref = std::abs(csi.h_l);
    const double N = static_cast<double>(scene.elements_per_ris);

    Observation obs;
    obs.csi = csi;
    obs.scene = scene;
    obs.tokens = nn::Tensor(R + 1, kTokenDim);

    for (int i = 0; i < R; ++i) {
        const channel::cplx cascade = csi.h_i[i] * csi.h_li[i] / ref;
        channel::cplx mi_sum{0.0, 0.0};
        for (const channel::cplx& c : csi.h_mi[i]) mi_sum += c;
        const channel::cplx icascade = csi.h_i[i] * mi_sum / ref;
        obs.tokens.at(i, 0) = 0.0;
        obs.tokens.at(i, 1) = N * cascade.real();
        obs.tokens.at(i, 2) = N * cascade.imag();
        obs.tokens.at(i, 3) = N * icascade.real();
        obs.tokens.at(i, 4) = N * icascade.imag();
        obs.tokens.at(i, 5) = 0.0;
    }
    channel::cplx m_sum{0.0, 0.0};
    for (const channel::cplx& c : csi.h_m) m_sum += c;
    obs.tokens.at(R, 0) = 1.0;
    obs.tokens.at(R, 1) = csi.h_l.real() / ref;
    obs.tokens.at(R, 2) = csi.h_l.imag() / ref;
    obs.tokens.at(R, 3) = m_sum.real() / ref;
    obs.tokens.at(R, 4) = m_sum.imag() / ref;
    obs.tokens.at(R, 5) =
        10.0 * std::log10(scene.tx_power / scene.noise_power) / 100.0;

    require(obs.tokens.all_finite(), "make_observation: non-finite features");
    return obs;
}

}  // namespace risctl::diffusion
