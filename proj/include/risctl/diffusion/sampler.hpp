#pragma once

#include "risctl/diffusion/denoiser.hpp"
#include "risctl/diffusion/observation.hpp"
#include "risctl/diffusion/schedule.hpp"

namespace risctl::diffusion {

enum class Guidance { off, on };

// Euclidean mode drops both projections from the chain and projects once at
// the end; it exists as the ambient-space baseline.
enum class ManifoldMode { torus, euclidean };

struct SampleResult {
    channel::PhaseConfig phases;
    nn::Tape tape;       // full reverse-chain graph, reusable for training
    nn::Tape::Var theta; // recovered angles (N R x 1)
    nn::Tape::Var x0;    // final embedded point (2 N R x 1)
};

// Guided reverse diffusion on the torus. Starting from a uniformly drawn
// x_T, each step forms the ambient drift
//   G_k = (x_k - beta_k epsilon_hat / sqrt(1 - alpha_bar_k)) / sqrt(alpha_k),
// optionally adds the eta-weighted, tangent-projected lift of the
// achievable-rate gradient at the current phases, perturbs along the
// tangent space with sqrt(beta_tilde_k)-scaled Gaussian noise (for k > 1)
// and projects back blockwise. The recorded tape differentiates the output
// angles with respect to the denoiser parameters; the guidance term enters
// as a constant.
//
// explore_scale multiplies the stochastic perturbation and is used for
// exploration during data collection.
SampleResult reverse_sample(Denoiser& denoiser, const DiffusionSchedule& schedule,
                            const Observation& obs, Rng& rng,
                            Guidance guidance = Guidance::on,
                            double explore_scale = 1.0,
                            ManifoldMode mode = ManifoldMode::torus);

}  // namespace risctl::diffusion
