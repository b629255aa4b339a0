#include "risctl/diffusion/sampler.hpp"

#include <cmath>

#include "risctl/torus/torus.hpp"

namespace risctl::diffusion {

namespace {

// eta * lift of dAR/dtheta into the ambient tangent direction
// (-sin th, cos th) at the current (detached) latent value.
nn::Tensor guidance_term(const Observation& obs, const nn::Tensor& x_val,
                         double eta) {
    const int R = obs.csi.num_ris();
    const int N = obs.scene.elements_per_ris;
    channel::PhaseConfig phases(R, N);
    for (int b = 0; b < R * N; ++b) {
        const double xa = x_val.data[2 * b], xb = x_val.data[2 * b + 1];
        phases.theta[b] =
            (xa == 0.0 && xb == 0.0) ? 0.0 : torus::wrap_angle(std::atan2(xb, xa));
    }
    const std::vector<double> g = channel::reward_phase_gradient(
        obs.csi, phases, channel::RisActivation::all_on(R), obs.scene);

    nn::Tensor lift(2 * R * N, 1);
    for (int b = 0; b < R * N; ++b) {
        lift.data[2 * b] = -std::sin(phases.theta[b]) * g[b] * eta;
        lift.data[2 * b + 1] = std::cos(phases.theta[b]) * g[b] * eta;
    }
    return lift;
}

bool has_zero_block(const nn::Tensor& v) {
    for (int b = 0; b < v.rows / 2; ++b) {
        if (std::hypot(v.data[2 * b], v.data[2 * b + 1]) == 0.0) return true;
    }
    return false;
}

}  // namespace

SampleResult reverse_sample(Denoiser& denoiser, const DiffusionSchedule& schedule,
                            const Observation& obs, Rng& rng, Guidance guidance,
                            double explore_scale, ManifoldMode mode) {
    schedule.validate();
    require(obs.tokens.all_finite(), "reverse_sample: non-finite observation");
    const int dim = denoiser.config().action_dim;
    const int R = obs.csi.num_ris();
    const int N = obs.scene.elements_per_ris;
    require(dim == 2 * R * N, "reverse_sample: action_dim != 2 N R");
    const bool on_torus = mode == ManifoldMode::torus;

    SampleResult res;
    nn::Tape& tape = res.tape;

    // x_T: a uniformly random angle per block
    nn::Tensor init(dim, 1);
    for (int b = 0; b < dim / 2; ++b) {
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        init.data[2 * b] = std::cos(th);
        init.data[2 * b + 1] = std::sin(th);
    }
    nn::Tape::Var x = tape.constant(init);

    for (int k = schedule.steps; k >= 1; --k) {
        const double beta = schedule.beta[k - 1];
        const double alpha = schedule.alpha[k - 1];
        const double abar = schedule.alpha_bar[k - 1];
        const double btilde = schedule.beta_tilde[k - 1] * explore_scale;

        nn::Tape::Var eps = denoiser.forward(tape, obs, x, k);
        nn::Tape::Var g = tape.scale(
            tape.sub(x, tape.scale(eps, beta / std::sqrt(1.0 - abar))),
            1.0 / std::sqrt(alpha));
        if (guidance == Guidance::on) {
            nn::Tensor lift = guidance_term(obs, tape.value(x), schedule.eta);
            if (on_torus) {
                torus::TorusPoint base;
                base.v = tape.value(x).data;
                lift.data = torus::project_tangent(base, lift.data).v;
            }
            g = tape.add(g, tape.constant(lift));
        }

        if (k > 1) {
            // redraw the tangent noise if a block of the pre-projection
            // value collapses to zero; measure-zero but float underflow can
            // manufacture it
            const double sd = std::sqrt(btilde);
            nn::Tensor xi(dim, 1);
            int attempts = 0;
            for (;;) {
                for (int i = 0; i < dim; ++i) xi.data[i] = rng.normal();
                if (!on_torus) break;
                torus::TorusPoint base;
                base.v = tape.value(x).data;
                const auto tv = torus::project_tangent(base, xi.data);
                nn::Tensor candidate = tape.value(g);
                for (int i = 0; i < dim; ++i) candidate.data[i] += sd * tv.v[i];
                if (!has_zero_block(candidate)) break;
                if (++attempts >= 3)
                    throw SingularProjection(
                        "reverse_sample: zero-norm block after 3 noise redraws");
            }
            nn::Tape::Var noise = tape.constant(xi);
            nn::Tape::Var pert =
                on_torus ? tape.tangent_project(x, noise) : noise;
            nn::Tape::Var next = tape.add(g, tape.scale(pert, sd));
            x = on_torus ? tape.block_normalize(next) : next;
        } else {
            x = tape.block_normalize(g);
        }
    }

    res.x0 = x;
    res.theta = tape.atan2_blocks(x);

    const nn::Tensor& th = tape.value(res.theta);
    res.phases = channel::PhaseConfig(R, N);
    for (int b = 0; b < R * N; ++b) res.phases.theta[b] = th.data[b];
    return res;
}

}  // namespace risctl::diffusion
