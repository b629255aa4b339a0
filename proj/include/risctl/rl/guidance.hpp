#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "risctl/diffusion/sampler.hpp"
#include "risctl/nn/adam.hpp"

namespace risctl::rl {

using diffusion::Observation;

// One collected interaction: the conditioning observation, the sampled
// phase action (flattened R x N angles in [0, 2pi)) and the achievable
// rate it earned under all-ON activation.
struct Transition {
    Observation obs;
    std::vector<double> action;
    double reward = 0.0;
};

// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
        require(capacity > 0, "ReplayBuffer: capacity must be positive");
    }

    void push(Transition t);
    const Transition& sample(Rng& rng) const;
    size_t size() const { return items_.size(); }

private:
    size_t capacity_;
    size_t next_ = 0;
    std::vector<Transition> items_;
};

// Scalar state-action value network: MLP on the flattened observation
// tokens concatenated with the torus embedding of the action.
class Critic {
public:
    Critic() = default;
    Critic(const std::string& name, int obs_dim, int action_dim, int hidden,
           Rng& rng);

    nn::Tape::Var forward(nn::Tape& tape, const Observation& obs,
                          nn::Tape::Var action_embedding);
    double eval(const Observation& obs, std::span<const double> action_theta);

    std::vector<nn::ParamTensor*> params();

private:
    nn::DenseLayer l1_, l2_, out_;
};

// Twin critics with the delayed-actor counter. The two networks never share
// parameters.
struct CriticPair {
    Critic q1;
    Critic q2;
    long update_count = 0;

    CriticPair() = default;
    CriticPair(int obs_dim, int action_dim, int hidden, Rng& rng);

    std::pair<double, double> eval(const Observation& obs,
                                   std::span<const double> action_theta);
    std::vector<nn::ParamTensor*> params();
};

// One regression step of both critics toward the observed rewards
// (episodic one-step targets, no bootstrap). Returns the two MSE losses.
std::pair<double, double> critic_update(CriticPair& critics,
                                        std::span<const Transition* const> batch,
                                        nn::AdamOptimizer& opt1,
                                        nn::AdamOptimizer& opt2);

// Ascends E[Q1(o, pi(o))] by differentiating through the full unrolled
// reverse chain with reparameterized noise; the critics stay frozen.
// Returns the batch-mean Q1.
double actor_update(diffusion::Denoiser& denoiser, CriticPair& critics,
                    std::span<const Observation* const> obs_batch,
                    const diffusion::DiffusionSchedule& schedule,
                    nn::AdamOptimizer& opt, Rng& rng,
                    diffusion::Guidance guidance);

struct TrainConfig {
    int env_steps = 1000;
    int batch = 128;         // critic batch
    int actor_batch = 16;
    int warmup = 64;         // buffer size before updates start
    int delay = 2;           // actor updates once per `delay` critic updates
    size_t capacity = 100000;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    int critic_hidden = 128;
    double explore_start = 1.5;  // beta_tilde scaling, annealed linearly
    double explore_end = 1.0;
    diffusion::Guidance guidance = diffusion::Guidance::on;
    diffusion::ManifoldMode manifold = diffusion::ManifoldMode::torus;
};

struct CurveRow {
    int step;
    double mean_reward;  // running mean over the last 100 rewards
    double q1_loss;
    double q2_loss;
};

struct TrainResult {
    std::vector<CurveRow> curve;
    double final_mean_reward = 0.0;  // mean over the last 100 steps
};

// Alternates collection (sampling with exploration noise, rewarding the
// all-ON achievable rate) with delayed twin-critic/actor updates.
TrainResult train_loop(const std::function<Observation(Rng&)>& env,
                       diffusion::Denoiser& denoiser, CriticPair& critics,
                       const diffusion::DiffusionSchedule& schedule,
                       const TrainConfig& cfg, Rng& rng);

}  // namespace risctl::rl
