#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risctl/channel/model.hpp"
#include "risctl/diffusion/schedule.hpp"
#include "risctl/rl/guidance.hpp"
#include "risctl/traj/trajectory.hpp"

namespace risctl::experiments {

// Synthetic mobility and placement knobs for snapshot sampling and
// evaluation episodes.
struct TrajectorySection {
    std::string source = "synthetic";  // "synthetic" | "fixtures"
    std::string fixture_dir = "data/geolife";
    double dt = 1.0;
    int history = 5;
    int horizon = 1;
    double speed_min = 1.0;
    double speed_max = 4.0;
    double target_radius_min = 60.0;
    double target_radius_max = 120.0;
    double interferer_radius_min = 5.0;
    double interferer_radius_max = 60.0;
    // fraction of interferers routed on straight lines passing close to a
    // RIS panel, the geometry where blind reflection hurts
    double ris_crosser_fraction = 0.5;
};

struct PolicySection {
    int width = 64;
    int ff_hidden = 128;
    int time_dim = 16;
    int steps = 4;
    std::string schedule = "cosine";
    double eta = 0.1;
    bool guidance = true;
    int quantize_bits = 0;
};

struct PredictorSection {
    int hidden = 64;
    int epochs = 10;
    int batch = 32;
    double lr = 1e-3;
};

struct EvaluationSection {
    int intervals = 50;
    int num_interferers = 3;
    std::vector<std::string> policies = {"tpgc", "always_on", "all_off"};
};

struct SweepSection {
    std::vector<double> power_w = {0.25, 0.5, 1.0, 2.0};
    std::vector<int> elements = {8, 16};
    std::vector<int> interferer_counts = {1, 2, 3};
    std::vector<std::string> schedules = {"vp", "linear", "cosine"};
    std::vector<int> step_counts = {2, 4, 16};
};

struct ExperimentConfig {
    int schema_version = 1;
    channel::Scene scene;          // ris_pos filled from the ring layout
    double ris_ring_radius = 10.0;
    TrajectorySection trajectory;
    PredictorSection predictor;
    PolicySection policy;
    rl::TrainConfig training;
    EvaluationSection evaluation;
    SweepSection sweep;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "runs/out";

    std::uint64_t hash = 0;  // FNV-1a of the canonical JSON dump

    diffusion::DiffusionSchedule make_schedule() const;
    diffusion::DiffusionSchedule make_schedule(const std::string& kind,
                                               int steps) const;
};

// Parses and validates a config file. Missing optional fields take the
// documented defaults; unknown fields and invalid values raise ConfigError
// listing every offending field. `seeds` is mandatory.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

std::string config_hash_hex(std::uint64_t hash);

}  // namespace risctl::experiments
