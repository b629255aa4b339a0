#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "risctl/torus/torus.hpp"

using namespace risctl;
using namespace risctl::torus;

TEST_CASE("embed: cardinal angles land on the axes") {
    const TorusPoint a = embed_phases(std::vector<double>{0.0});
    CHECK(a.v[0] == doctest::Approx(1.0));
    CHECK(a.v[1] == doctest::Approx(0.0));
    const TorusPoint b = embed_phases(std::vector<double>{M_PI / 2.0});
    CHECK(b.v[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(b.v[1] == doctest::Approx(1.0));
}

TEST_CASE("embed/recover are mutually inverse mod 2 pi") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> theta(6);
        for (double& t : theta) t = rng.uniform(-15.0, 15.0);
        const auto recovered = recover_phases(embed_phases(theta));
        for (size_t i = 0; i < theta.size(); ++i) {
            const double diff =
                std::remainder(recovered[i] - theta[i], 2.0 * M_PI);
            CHECK(std::fabs(diff) < 1e-12);
            CHECK(recovered[i] >= 0.0);
            CHECK(recovered[i] < 2.0 * M_PI);
        }
    }
}

TEST_CASE("project: 3-4-5 block normalizes to the unit circle") {
    const TorusPoint p = project_torus(std::vector<double>{3.0, 4.0});
    CHECK(p.v[0] == doctest::Approx(0.6));
    CHECK(p.v[1] == doctest::Approx(0.8));
}

TEST_CASE("project is bitwise idempotent") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(8);
        for (double& v : x) v = rng.normal();
        const TorusPoint once = project_torus(x);
        const TorusPoint twice = project_torus(once.v);
        CHECK(once.v == twice.v);
    }
}

TEST_CASE("project: zero block raises a singular projection error") {
    CHECK_THROWS_AS(project_torus(std::vector<double>{0.0, 0.0, 1.0, 0.0}),
                    SingularProjection);
}

TEST_CASE("tangent projection removes the radial component") {
    const TorusPoint x = embed_phases(std::vector<double>{0.0});
    const TangentVector t = project_tangent(x, std::vector<double>{2.5, -1.5});
    CHECK(t.v[0] == doctest::Approx(0.0));
    CHECK(t.v[1] == doctest::Approx(-1.5));
}

TEST_CASE("tangent projection of the base point vanishes") {
    Rng rng(11);
    std::vector<double> theta(4);
    for (double& t : theta) t = rng.uniform(0.0, 2.0 * M_PI);
    const TorusPoint x = embed_phases(theta);
    const TangentVector t = project_tangent(x, x.v);
    for (double v : t.v) CHECK(std::fabs(v) < 1e-15);
}

TEST_CASE("tangent output is orthogonal to the base blockwise") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> theta(5);
        for (double& t : theta) t = rng.uniform(0.0, 2.0 * M_PI);
        const TorusPoint x = embed_phases(theta);
        std::vector<double> xi(10);
        for (double& v : xi) v = rng.normal();
        const TangentVector t = project_tangent(x, xi);
        for (int b = 0; b < 5; ++b) {
            const double dot =
                x.v[2 * b] * t.v[2 * b] + x.v[2 * b + 1] * t.v[2 * b + 1];
            CHECK(std::fabs(dot) < 1e-12);
        }
    }
}

TEST_CASE("recover: wrap convention maps (0, -1) to 3 pi / 2") {
    TorusPoint p;
    p.v = {1.0, 0.0, 0.0, -1.0, -1.0, 0.0};
    const auto theta = recover_phases(p);
    CHECK(theta[0] == doctest::Approx(0.0));
    CHECK(theta[1] == doctest::Approx(3.0 * M_PI / 2.0));
    CHECK(theta[2] == doctest::Approx(M_PI));
}

TEST_CASE("quantize: one bit snaps to {0, pi}") {
    const auto q =
        quantize_phases(std::vector<double>{0.1, 3.0}, 1);
    CHECK(q[0] == doctest::Approx(0.0));
    CHECK(q[1] == doctest::Approx(M_PI));
}

TEST_CASE("quantize: grid points are fixed points") {
    for (int bits = 1; bits <= 8; ++bits) {
        const int levels = 1 << bits;
        std::vector<double> grid(levels);
        for (int k = 0; k < levels; ++k) grid[k] = 2.0 * M_PI * k / levels;
        const auto q = quantize_phases(grid, bits);
        for (int k = 0; k < levels; ++k)
            CHECK(q[k] == doctest::Approx(grid[k]).epsilon(1e-15));
    }
}

TEST_CASE("quantize: exact tie goes to the smaller grid index") {
    // pi/4 is equidistant between 0 and pi/2 on the 2-bit grid
    const auto q = quantize_phases(std::vector<double>{M_PI / 4.0}, 2);
    CHECK(q[0] == doctest::Approx(0.0));
}

TEST_CASE("quantize: error never exceeds half the grid step") {
    Rng rng(17);
    for (int bits = 1; bits <= 4; ++bits) {
        for (int trial = 0; trial < 500; ++trial) {
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            const auto q = quantize_phases(std::vector<double>{theta}, bits);
            const double err = std::fabs(std::remainder(q[0] - theta, 2.0 * M_PI));
            CHECK(err <= M_PI / (1 << bits) + 1e-12);
        }
    }
}

TEST_CASE("quantize: bits outside [1,8] are rejected") {
    CHECK_THROWS_AS(quantize_phases(std::vector<double>{0.5}, 0),
                    ContractViolation);
    CHECK_THROWS_AS(quantize_phases(std::vector<double>{0.5}, 9),
                    ContractViolation);
}

TEST_CASE("von Mises: kappa 0 is uniform (small resultant length)") {
    Rng rng(19);
    double cx = 0.0, cy = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double t = sample_von_mises(1.0, 0.0, rng);
        CHECK(t >= 0.0);
        CHECK(t < 2.0 * M_PI);
        cx += std::cos(t);
        cy += std::sin(t);
    }
    const double resultant = std::hypot(cx / n, cy / n);
    CHECK(resultant < 0.02);
}

TEST_CASE("von Mises: kappa 50 concentrates near the mean") {
    Rng rng(23);
    double cx = 0.0, cy = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double t = sample_von_mises(1.0, 50.0, rng);
        cx += std::cos(t);
        cy += std::sin(t);
    }
    const double mean = std::atan2(cy, cx);
    CHECK(std::fabs(mean - 1.0) < 0.05);
    CHECK(std::hypot(cx / n, cy / n) > 0.9);  // tight spread
}

TEST_CASE("von Mises: seeded draws replay exactly") {
    Rng a(31), b(31);
    for (int i = 0; i < 200; ++i)
        CHECK(sample_von_mises(0.7, 3.0, a) == sample_von_mises(0.7, 3.0, b));
}

TEST_CASE("wrap_angle lands in [0, 2 pi)") {
    Rng rng(37);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(rng.uniform(-50.0, 50.0));
        CHECK(w >= 0.0);
        CHECK(w < 2.0 * M_PI);
    }
}
