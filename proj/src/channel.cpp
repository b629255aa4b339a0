#include "risctl/channel/model.hpp"

#include <cmath>

namespace risctl::channel {

void Scene::validate() const {
    require(wavelength > 0.0, "Scene: wavelength must be positive");
    require(pathloss_exp >= 1.0, "Scene: pathloss exponent must be >= 1");
    require(tx_power > 0.0, "Scene: tx power must be positive");
    require(noise_power > 0.0, "Scene: noise power must be positive");
    require(elements_per_ris >= 1, "Scene: need at least one element per RIS");
    require(!ris_pos.empty(), "Scene: need at least one RIS");
    for (const Vec2& p : ris_pos)
        if (distance(p, bs_pos) <= 0.0)
            throw DegenerateGeometry("Scene: RIS coincides with BS");
}

std::vector<Vec2> Scene::ring_positions(const Vec2& center, double radius,
                                        int count) {
    require(count >= 1 && radius > 0.0, "ring_positions: bad arguments");
    std::vector<Vec2> out(count);
    for (int i = 0; i < count; ++i) {
        const double ang = 2.0 * M_PI * i / count;
        out[i] = {center.x + radius * std::cos(ang),
                  center.y + radius * std::sin(ang)};
    }
    return out;
}

void CsiSnapshot::validate() const {
    require(h_li.size() == h_i.size() && h_mi.size() == h_i.size(),
            "CsiSnapshot: per-RIS list lengths differ");
    auto ok = [](const cplx& c) {
        return std::isfinite(c.real()) && std::isfinite(c.imag()) &&
               std::abs(c) > 0.0;
    };
    require(ok(h_l), "CsiSnapshot: bad target direct coefficient");
    for (const cplx& c : h_m) require(ok(c), "CsiSnapshot: bad interferer direct");
    for (const cplx& c : h_i) require(ok(c), "CsiSnapshot: bad RIS->BS link");
    for (const cplx& c : h_li) require(ok(c), "CsiSnapshot: bad target->RIS link");
    for (const auto& row : h_mi) {
        require(row.size() == h_m.size(), "CsiSnapshot: h_mi shape mismatch");
        for (const cplx& c : row) require(ok(c), "CsiSnapshot: bad interferer->RIS");
    }
}

cplx channel_coefficient(double d, const Scene& scene) {
    if (d <= 0.0)
        throw DegenerateGeometry("channel_coefficient: non-positive distance");
    const double mag = std::pow(d, -scene.pathloss_exp / 2.0);
    const double phase = -2.0 * M_PI * d / scene.wavelength;
    return std::polar(mag, phase);
}

namespace {

// cos(angle of incidence) against a boresight normal pointing at the BS;
// clamped at zero for grazing-or-behind geometry.
double incidence_factor(const Vec2& user, const Vec2& ris, const Scene& scene) {
    const double nx = scene.bs_pos.x - ris.x, ny = scene.bs_pos.y - ris.y;
    const double ux = user.x - ris.x, uy = user.y - ris.y;
    const double nn = std::hypot(nx, ny), uu = std::hypot(ux, uy);
    if (nn == 0.0 || uu == 0.0) return 1.0;
    const double c = (nx * ux + ny * uy) / (nn * uu);
    return std::max(0.0, c);
}

}  // namespace

CsiSnapshot snapshot_from_positions(const Vec2& target,
                                    const std::vector<Vec2>& interferers,
                                    const Scene& scene) {
    scene.validate();
    auto check_distinct = [&](const Vec2& p, const char* what) {
        if (distance(p, scene.bs_pos) <= 0.0)
            throw DegenerateGeometry(std::string(what) + " coincides with BS");
        for (const Vec2& r : scene.ris_pos)
            if (distance(p, r) <= 0.0)
                throw DegenerateGeometry(std::string(what) + " coincides with a RIS");
    };
    check_distinct(target, "target");
    for (const Vec2& p : interferers) check_distinct(p, "interferer");

    CsiSnapshot csi;
    csi.h_l = channel_coefficient(distance(target, scene.bs_pos), scene);
    for (const Vec2& p : interferers)
        csi.h_m.push_back(channel_coefficient(distance(p, scene.bs_pos), scene));
    const int R = scene.num_ris();
    csi.h_i.resize(R);
    csi.h_li.resize(R);
    csi.h_mi.assign(R, std::vector<cplx>(interferers.size()));
    for (int i = 0; i < R; ++i) {
        const Vec2& rp = scene.ris_pos[i];
        csi.h_i[i] = channel_coefficient(distance(rp, scene.bs_pos), scene);
        csi.h_li[i] = channel_coefficient(distance(target, rp), scene);
        if (scene.incidence_efficiency)
            csi.h_li[i] *= incidence_factor(target, rp, scene);
        for (size_t m = 0; m < interferers.size(); ++m) {
            csi.h_mi[i][m] =
                channel_coefficient(distance(interferers[m], rp), scene);
            if (scene.incidence_efficiency)
                csi.h_mi[i][m] *= incidence_factor(interferers[m], rp, scene);
        }
    }
    return csi;
}

cplx ris_sum_factor(std::span<const double> theta_row) {
    cplx s{0.0, 0.0};
    for (double th : theta_row) s += std::polar(1.0, th);
    return s;
}

double sinr_from_sums(const CsiSnapshot& csi, const RisActivation& act,
                      const Scene& scene, std::span<const cplx> sums) {
    const int R = csi.num_ris();
    require(static_cast<int>(act.v.size()) == R, "sinr: activation size != R");
    require(static_cast<int>(sums.size()) == R, "sinr: sums size != R");

    cplx signal = csi.h_l;
    for (int i = 0; i < R; ++i)
        if (act.v[i]) signal += sums[i] * csi.h_i[i] * csi.h_li[i];

    cplx interference{0.0, 0.0};
    for (const cplx& hm : csi.h_m) interference += hm;
    for (int i = 0; i < R; ++i) {
        if (!act.v[i]) continue;
        cplx mi_sum{0.0, 0.0};
        for (const cplx& c : csi.h_mi[i]) mi_sum += c;
        interference += sums[i] * csi.h_i[i] * mi_sum;
    }

    const double num = scene.tx_power * std::norm(signal);
    const double den =
        scene.tx_power * std::norm(interference) + scene.noise_power;
    return num / den;
}

double sinr(const CsiSnapshot& csi, const PhaseConfig& phases,
            const RisActivation& act, const Scene& scene) {
    const int R = csi.num_ris();
    require(phases.num_ris == R, "sinr: phase config RIS count != R");
    std::vector<cplx> sums(R);
    for (int i = 0; i < R; ++i) sums[i] = ris_sum_factor(phases.row(i));
    return sinr_from_sums(csi, act, scene, sums);
}

double achievable_rate(const CsiSnapshot& csi, const PhaseConfig& phases,
                       const RisActivation& act, const Scene& scene,
                       RateMode mode) {
    const double g =
        mode == RateMode::all_off
            ? sinr(csi, phases, RisActivation::all_off(csi.num_ris()), scene)
            : sinr(csi, phases, act, scene);
    return std::log2(1.0 + g);
}

std::vector<double> reward_phase_gradient(const CsiSnapshot& csi,
                                          const PhaseConfig& phases,
                                          const RisActivation& act,
                                          const Scene& scene) {
    const int R = csi.num_ris();
    const int N = phases.elements;
    require(phases.num_ris == R, "reward_phase_gradient: shape mismatch");

    // gamma = P |A|^2 / (P |B|^2 + s2) with
    //   A = h_l + sum_i v_i S_i a_i,  a_i = h_i h_li
    //   B = sum_m h_m + sum_i v_i S_i b_i,  b_i = h_i sum_m h_mi
    // dS_i/dtheta_in = j exp(j theta_in), so
    //   d|A|^2/dtheta_in = -2 v_i Im(conj(A) a_i e^{j theta}), same for B.
    std::vector<cplx> a(R), b(R), sums(R);
    for (int i = 0; i < R; ++i) {
        a[i] = csi.h_i[i] * csi.h_li[i];
        cplx mi_sum{0.0, 0.0};
        for (const cplx& c : csi.h_mi[i]) mi_sum += c;
        b[i] = csi.h_i[i] * mi_sum;
        sums[i] = ris_sum_factor(phases.row(i));
    }
    cplx A = csi.h_l;
    cplx B{0.0, 0.0};
    for (const cplx& hm : csi.h_m) B += hm;
    for (int i = 0; i < R; ++i) {
        if (!act.v[i]) continue;
        A += sums[i] * a[i];
        B += sums[i] * b[i];
    }
    const double P = scene.tx_power;
    const double numer = P * std::norm(A);
    const double denom = P * std::norm(B) + scene.noise_power;
    const double gamma = numer / denom;
    const double rate_scale = 1.0 / ((1.0 + gamma) * std::log(2.0));

    std::vector<double> grad(static_cast<size_t>(R) * N, 0.0);
    for (int i = 0; i < R; ++i) {
        if (!act.v[i]) continue;
        for (int n = 0; n < N; ++n) {
            const cplx e = std::polar(1.0, phases.at(i, n));
            const double dA2 = -2.0 * std::imag(std::conj(A) * a[i] * e);
            const double dB2 = -2.0 * std::imag(std::conj(B) * b[i] * e);
            const double dgamma =
                (P * dA2 * denom - numer * P * dB2) / (denom * denom);
            grad[static_cast<size_t>(i) * N + n] = rate_scale * dgamma;
        }
    }
    return grad;
}

}  // namespace risctl::channel
