#pragma once

#include "risctl/experiments/config.hpp"

namespace risctl::experiments {

// Randomized training snapshot: the target in its annulus, interferers
// either free-roaming or parked next to a RIS panel per the crosser
// fraction. Positions are rejected within 0.5 m of the BS or a RIS.
diffusion::Observation sample_training_observation(const ExperimentConfig& cfg,
                                                   const channel::Scene& scene,
                                                   int num_interferers,
                                                   Rng& rng);

// One evaluation episode: per-step positions for the target and each
// interferer. Crosser interferers run constant-velocity lines through a
// point near a RIS; everyone else follows a smooth bounded random walk.
struct EvalEpisode {
    std::vector<Vec2> target;
    std::vector<std::vector<Vec2>> interferers;
};

EvalEpisode make_eval_episode(const ExperimentConfig& cfg,
                              const channel::Scene& scene, int num_interferers,
                              int steps, Rng& rng);

// Synthetic smooth trajectories used to train the predictor when the
// config selects the synthetic source.
std::vector<std::vector<traj::KinematicSample>> synthetic_training_traces(
    const ExperimentConfig& cfg, int count, int length, Rng& rng);

// GeoLife fixture traces (projected, resampled, feature-extracted), sorted
// by filename for reproducibility.
std::vector<std::vector<traj::KinematicSample>> fixture_traces(
    const ExperimentConfig& cfg);

}  // namespace risctl::experiments
