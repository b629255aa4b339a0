#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "risctl/channel/model.hpp"
#include "risctl/common/rng.hpp"

using namespace risctl;
using namespace risctl::channel;

namespace {

Scene small_scene(int num_ris, int elements) {
    Scene s;
    s.bs_pos = {0.0, 0.0};
    s.ris_pos = Scene::ring_positions(s.bs_pos, 10.0, num_ris);
    s.elements_per_ris = elements;
    return s;
}

}  // namespace

TEST_CASE("coefficient: full-wavelength distance wraps the phase to zero") {
    Scene s = small_scene(1, 1);
    s.wavelength = 0.0857;
    const cplx c = channel_coefficient(s.wavelength, s);
    CHECK(std::abs(c) == doctest::Approx(std::pow(s.wavelength, -1.0)));
    CHECK(std::arg(c) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("coefficient: half wavelength flips the sign") {
    Scene s = small_scene(1, 1);
    s.wavelength = 2.0;
    const cplx c = channel_coefficient(1.0, s);
    CHECK(c.real() == doctest::Approx(-1.0));
    CHECK(c.imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coefficient: matches the high-precision evaluation at 10 m") {
    // frozen from an independent 40-digit evaluation of
    // d^{-1} exp(-j 2 pi d / lambda), lambda = 0.0857, d = 10
    Scene s = small_scene(1, 1);
    s.wavelength = 0.0857;
    const cplx c = channel_coefficient(10.0, s);
    CHECK(c.real() == doctest::Approx(-0.039071238180325957).epsilon(1e-12));
    CHECK(c.imag() == doctest::Approx(0.092051281072325325).epsilon(1e-12));
}

TEST_CASE("coefficient: non-positive distance is degenerate") {
    Scene s = small_scene(1, 1);
    CHECK_THROWS_AS(channel_coefficient(0.0, s), DegenerateGeometry);
    CHECK_THROWS_AS(channel_coefficient(-2.0, s), DegenerateGeometry);
}

TEST_CASE("snapshot: zero interferers leaves interference lists empty") {
    Scene s = small_scene(2, 4);
    const CsiSnapshot csi = snapshot_from_positions({50.0, 20.0}, {}, s);
    CHECK(csi.h_m.empty());
    CHECK(csi.h_mi[0].empty());
    CHECK(csi.num_ris() == 2);
    csi.validate();
}

TEST_CASE("snapshot: equidistant RIS gives equal link magnitudes") {
    Scene s = small_scene(1, 4);
    s.ris_pos = {{10.0, 0.0}};
    // target mirrored so |target - ris| == |bs - ris|
    const CsiSnapshot csi = snapshot_from_positions({20.0, 0.0}, {}, s);
    CHECK(std::abs(csi.h_i[0]) == doctest::Approx(std::abs(csi.h_li[0])));
}

TEST_CASE("snapshot: 2 RIS, 2 interferers matches direct evaluation") {
    Scene s = small_scene(2, 4);
    const Vec2 target{40.0, 30.0};
    const std::vector<Vec2> intf = {{-20.0, 10.0}, {5.0, -45.0}};
    const CsiSnapshot csi = snapshot_from_positions(target, intf, s);

    // independent recomputation straight from the distances
    auto coef = [&](double d) {
        return std::polar(std::pow(d, -s.pathloss_exp / 2.0),
                          -2.0 * M_PI * d / s.wavelength);
    };
    CHECK(std::abs(csi.h_l - coef(std::hypot(40.0, 30.0))) < 1e-15);
    for (int i = 0; i < 2; ++i) {
        const double d_i = distance(s.ris_pos[i], s.bs_pos);
        CHECK(std::abs(csi.h_i[i] - coef(d_i)) < 1e-15);
        CHECK(std::abs(csi.h_li[i] - coef(distance(target, s.ris_pos[i]))) <
              1e-15);
        for (int m = 0; m < 2; ++m)
            CHECK(std::abs(csi.h_mi[i][m] -
                           coef(distance(intf[m], s.ris_pos[i]))) < 1e-15);
    }
}

TEST_CASE("snapshot: coincident positions are rejected") {
    Scene s = small_scene(1, 4);
    CHECK_THROWS_AS(snapshot_from_positions(s.bs_pos, {}, s),
                    DegenerateGeometry);
    CHECK_THROWS_AS(snapshot_from_positions({50.0, 0.0}, {s.ris_pos[0]}, s),
                    DegenerateGeometry);
}

TEST_CASE("sum factor: coherent sum of 600 zero phases") {
    std::vector<double> theta(600, 0.0);
    const cplx sum = ris_sum_factor(theta);
    CHECK(sum.real() == doctest::Approx(600.0));
    CHECK(sum.imag() == doctest::Approx(0.0));
}

TEST_CASE("sum factor: opposite phases cancel") {
    std::vector<double> theta = {0.0, M_PI};
    CHECK(std::abs(ris_sum_factor(theta)) < 1e-15);
}

TEST_CASE("sum factor: random angles match the direct complex sum") {
    Rng rng(5);
    std::vector<double> theta(8);
    cplx expect{0.0, 0.0};
    for (double& t : theta) {
        t = rng.uniform(0.0, 2.0 * M_PI);
        expect += std::polar(1.0, t);
    }
    CHECK(std::abs(ris_sum_factor(theta) - expect) < 1e-12);
    CHECK(std::abs(ris_sum_factor(theta)) <= 8.0 + 1e-12);
}

TEST_CASE("sinr: direct link only") {
    Scene s = small_scene(1, 4);
    const CsiSnapshot csi = snapshot_from_positions({60.0, 10.0}, {}, s);
    PhaseConfig phases(1, 4);
    const double g = sinr(csi, phases, RisActivation::all_off(1), s);
    CHECK(g == doctest::Approx(s.tx_power * std::norm(csi.h_l) /
                               s.noise_power));
}

TEST_CASE("sinr: 1 W and 1 pW defaults force gamma = 100 at |h_l| = 1e-5") {
    Scene s = small_scene(1, 1);
    s.tx_power = 1.0;
    s.noise_power = 1e-12;
    CsiSnapshot csi;
    csi.h_l = {1e-5, 0.0};
    csi.h_i = {cplx{1.0, 0.0}};
    csi.h_li = {cplx{1.0, 0.0}};
    csi.h_mi = {{}};
    PhaseConfig phases(1, 1);
    const double g = sinr(csi, phases, RisActivation::all_off(1), s);
    CHECK(g == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("sinr: fixed snapshot matches an independent complex oracle") {
    Scene s = small_scene(1, 4);
    const Vec2 target{45.0, -12.0};
    const std::vector<Vec2> intf = {{12.0, 18.0}};
    const CsiSnapshot csi = snapshot_from_positions(target, intf, s);
    Rng rng(9);
    PhaseConfig phases(1, 4);
    for (double& t : phases.theta) t = rng.uniform(0.0, 2.0 * M_PI);
    const RisActivation act = RisActivation::all_on(1);

    // independent oracle straight from the definition
    cplx sum{0.0, 0.0};
    for (double t : phases.theta) sum += std::polar(1.0, t);
    const cplx a = csi.h_l + sum * csi.h_i[0] * csi.h_li[0];
    const cplx b = csi.h_m[0] + sum * csi.h_i[0] * csi.h_mi[0][0];
    const double expect = s.tx_power * std::norm(a) /
                          (s.tx_power * std::norm(b) + s.noise_power);
    CHECK(sinr(csi, phases, act, s) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("achievable rate: gamma of 1 gives one bit, zero gives zero") {
    CHECK(std::log2(1.0 + 1.0) == doctest::Approx(1.0));
    Scene s = small_scene(1, 2);
    const CsiSnapshot csi = snapshot_from_positions({70.0, 0.0}, {}, s);
    PhaseConfig phases(1, 2);
    const double g = sinr(csi, phases, RisActivation::all_on(1), s);
    const double ar =
        achievable_rate(csi, phases, RisActivation::all_on(1), s,
                        RateMode::on_config);
    CHECK(ar == doctest::Approx(std::log2(1.0 + g)).epsilon(1e-12));
    // all_off mode ignores the activation argument
    const double off1 = achievable_rate(csi, phases, RisActivation::all_on(1),
                                        s, RateMode::all_off);
    const double off2 = achievable_rate(csi, phases, RisActivation::all_off(1),
                                        s, RateMode::all_off);
    CHECK(off1 == off2);
}

TEST_CASE("phase gradient: all RIS off means zero gradient") {
    Scene s = small_scene(2, 4);
    const CsiSnapshot csi =
        snapshot_from_positions({40.0, 5.0}, {{15.0, 25.0}}, s);
    PhaseConfig phases(2, 4);
    const auto g =
        reward_phase_gradient(csi, phases, RisActivation::all_off(2), s);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("phase gradient: stationary at alignment for N = 1, no interferers") {
    Scene s = small_scene(1, 1);
    const CsiSnapshot csi = snapshot_from_positions({50.0, 20.0}, {}, s);
    const double aligned =
        std::arg(csi.h_l) - std::arg(csi.h_i[0] * csi.h_li[0]);
    PhaseConfig phases(1, 1);
    phases.theta[0] = aligned;
    auto g = reward_phase_gradient(csi, phases, RisActivation::all_on(1), s);
    CHECK(std::fabs(g[0]) < 1e-9);
    phases.theta[0] = aligned + M_PI;  // anti-aligned is also stationary
    g = reward_phase_gradient(csi, phases, RisActivation::all_on(1), s);
    CHECK(std::fabs(g[0]) < 1e-9);
}

TEST_CASE("phase gradient: matches central differences") {
    Scene s = small_scene(2, 3);
    const CsiSnapshot csi = snapshot_from_positions(
        {35.0, 22.0}, {{18.0, -9.0}, {-11.0, 14.0}}, s);
    Rng rng(21);
    PhaseConfig phases(2, 3);
    for (double& t : phases.theta) t = rng.uniform(0.0, 2.0 * M_PI);
    const RisActivation act = RisActivation::all_on(2);

    const auto grad = reward_phase_gradient(csi, phases, act, s);
    const double eps = 1e-6;
    double worst = 0.0;
    for (size_t i = 0; i < phases.theta.size(); ++i) {
        PhaseConfig up = phases, down = phases;
        up.theta[i] += eps;
        down.theta[i] -= eps;
        const double fd =
            (achievable_rate(csi, up, act, s, RateMode::on_config) -
             achievable_rate(csi, down, act, s, RateMode::on_config)) /
            (2.0 * eps);
        const double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-9});
        worst = std::max(worst, std::fabs(fd - grad[i]) / denom);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("invariant: 2 pi phase shifts leave the SINR unchanged") {
    Scene s = small_scene(2, 4);
    const CsiSnapshot csi =
        snapshot_from_positions({42.0, -7.0}, {{13.0, 21.0}}, s);
    Rng rng(33);
    PhaseConfig phases(2, 4);
    for (double& t : phases.theta) t = rng.uniform(0.0, 2.0 * M_PI);
    const double base = sinr(csi, phases, RisActivation::all_on(2), s);
    for (int trial = 0; trial < 16; ++trial) {
        PhaseConfig shifted = phases;
        const size_t idx = rng.uniform_int(static_cast<int>(phases.theta.size()));
        shifted.theta[idx] += 2.0 * M_PI * (1 + rng.uniform_int(3));
        const double shifted_g = sinr(csi, shifted, RisActivation::all_on(2), s);
        CHECK(shifted_g == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("invariant: aligned phases hit the closed-form optimum") {
    Scene s = small_scene(1, 16);
    const CsiSnapshot csi = snapshot_from_positions({55.0, 35.0}, {}, s);
    const double aligned =
        std::arg(csi.h_l) - std::arg(csi.h_i[0] * csi.h_li[0]);
    PhaseConfig phases(1, 16);
    for (double& t : phases.theta) t = aligned;
    const double ar = achievable_rate(csi, phases, RisActivation::all_on(1), s,
                                      RateMode::on_config);
    const double closed = std::log2(
        1.0 + s.tx_power *
                  std::pow(std::abs(csi.h_l) +
                               16.0 * std::abs(csi.h_i[0] * csi.h_li[0]),
                           2.0) /
                  s.noise_power);
    CHECK(ar == doctest::Approx(closed).epsilon(1e-12));

    // random phase configs never beat it
    Rng rng(41);
    for (int trial = 0; trial < 64; ++trial) {
        PhaseConfig random(1, 16);
        for (double& t : random.theta) t = rng.uniform(0.0, 2.0 * M_PI);
        CHECK(achievable_rate(csi, random, RisActivation::all_on(1), s,
                              RateMode::on_config) <= ar + 1e-12);
    }
}

TEST_CASE("invariant: equal per-RIS sums give bitwise-equal SINR") {
    Scene s = small_scene(1, 4);
    const CsiSnapshot csi =
        snapshot_from_positions({38.0, 16.0}, {{22.0, 3.0}}, s);
    // two different configs realizing the same element sum
    PhaseConfig a(1, 4), b(1, 4);
    a.theta = {0.3, 1.1, 4.0, 5.2};
    const cplx target_sum = ris_sum_factor(a.theta);
    // b: permutation of a (the sum is order-free)
    b.theta = {5.2, 0.3, 4.0, 1.1};
    CHECK(std::abs(ris_sum_factor(b.theta) - target_sum) < 1e-15);
    const double ga = sinr(csi, a, RisActivation::all_on(1), s);
    const double gb = sinr(csi, b, RisActivation::all_on(1), s);
    CHECK(ga == gb);
    // and sinr_from_sums reproduces the same value from the sum alone
    const cplx sums[1] = {target_sum};
    CHECK(sinr_from_sums(csi, RisActivation::all_on(1), s, sums) ==
          doctest::Approx(ga).epsilon(1e-15));
}

TEST_CASE("global CSI phase rotation keeps the aligned optimum rate") {
    Scene s = small_scene(1, 8);
    CsiSnapshot csi = snapshot_from_positions({48.0, 11.0}, {{20.0, -6.0}}, s);
    auto optimum = [&](const CsiSnapshot& c) {
        const double th = std::arg(c.h_l) - std::arg(c.h_i[0] * c.h_li[0]);
        PhaseConfig p(1, 8);
        for (double& t : p.theta) t = th;
        return std::pair{th, achievable_rate(c, p, RisActivation::all_on(1), s,
                                             RateMode::on_config)};
    };
    const auto [th0, ar0] = optimum(csi);
    const cplx rot = std::polar(1.0, 0.8);
    CsiSnapshot rotated = csi;
    rotated.h_l *= rot;
    for (auto& v : rotated.h_m) v *= rot;
    for (auto& v : rotated.h_i) v *= rot;
    for (auto& v : rotated.h_li) v *= rot;
    for (auto& row : rotated.h_mi)
        for (auto& v : row) v *= rot;
    const auto [th1, ar1] = optimum(rotated);
    CHECK(ar1 == doctest::Approx(ar0).epsilon(1e-9));
    // the optimal angle shifts by a constant (-0.8 here, mod 2 pi)
    const double shift = std::remainder(th1 - th0 + 0.8, 2.0 * M_PI);
    CHECK(std::fabs(shift) < 1e-9);
}
