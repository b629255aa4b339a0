#pragma once

#include <map>
#include <memory>
#include <optional>

#include "risctl/control/controller.hpp"
#include "risctl/experiments/config.hpp"
#include "risctl/experiments/scenario.hpp"

namespace risctl::experiments {

// Everything a policy evaluation needs: the trained sampler, critics (kept
// for inspection), schedule and optionally a trained predictor.
struct TrainedPolicy {
    diffusion::Denoiser denoiser;
    rl::CriticPair critics;
    diffusion::DiffusionSchedule schedule;
    rl::TrainResult train_result;
    diffusion::ManifoldMode manifold = diffusion::ManifoldMode::torus;
};

// Trains the diffusion policy on randomized snapshots of `scene` with the
// given interferer count. Deterministic per seed.
TrainedPolicy train_policy(const ExperimentConfig& cfg,
                           const channel::Scene& scene, int num_interferers,
                           std::uint64_t seed,
                           diffusion::ManifoldMode manifold =
                               diffusion::ManifoldMode::torus);

// Trains the trajectory predictor from the configured source.
traj::PredictorModel train_predictor_from_config(
    const ExperimentConfig& cfg, std::uint64_t seed,
    std::vector<double>* loss_curve = nullptr);

// One decision-log row; realized quantities are scored on true positions.
struct DecisionRow {
    int interval = 0;
    std::string activation;  // semicolon-joined v_i
    double ar_on = 0.0;
    double ar_off = 0.0;
    double realized_ar = 0.0;
    double realized_sinr = 0.0;
    std::string policy;
    std::uint64_t seed = 0;
};

// Known evaluation policies: tpgc, always_on, all_off, random_phase, tpc
// (aligned phases + the ON/OFF rule), aligned_on, euclidean.
std::vector<std::string> known_policies();

// Runs one policy over one episode seed. `policy_ptr` may be null for
// non-learned policies; `predictor` may be null for perfect prediction.
std::vector<DecisionRow> evaluate_policy(const ExperimentConfig& cfg,
                                         const channel::Scene& scene,
                                         const std::string& policy,
                                         TrainedPolicy* learned,
                                         traj::PredictorModel* predictor,
                                         int num_interferers,
                                         std::uint64_t seed);

enum class SweepMetric { sinr, ar };
enum class SweepAxis { power, elements };

struct SweepCell {
    double axis_value = 0.0;
    int num_interferers = 0;
    std::string policy;
    double mean = 0.0;
    double stddev = 0.0;
    int n = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<DecisionRow> decisions;  // every row behind the aggregates
    std::vector<double> axis_values;     // row order
};

// Mean/std of the metric per (axis value, interferer count, policy) over
// all config seeds. The elements axis retrains the policy per element
// count; the power axis reuses one policy per seed and re-scores at each
// power. Points run on a small worker pool with per-point derived rng.
SweepResult sweep(const ExperimentConfig& cfg, SweepMetric metric,
                  SweepAxis axis, const std::vector<std::string>& policies);

struct ArrEntry {
    int m_train = 0;
    int m_test = 0;
    double ar_test = 0.0;
    double ar_matched = 0.0;
    double arr = 0.0;
};

struct ArrResult {
    std::vector<int> counts;
    std::vector<ArrEntry> entries;
    std::vector<DecisionRow> decisions;
};

// Achievable-rate-ratio generalization matrix over the configured
// interferer counts: one policy trained per row count, each evaluated at
// every column count and normalized by its matched-environment mean rate.
ArrResult arr_matrix(const ExperimentConfig& cfg);

// Full pipeline into a run directory: trains predictor and policy, writes
// manifest, reward curve, predictor loss curve, per-policy decision logs,
// both sweep tables and checkpoints. Byte-identical outputs for identical
// config and seed.
void run_config(const ExperimentConfig& cfg,
                const std::string& out_dir_override = "",
                std::optional<std::uint64_t> seed_override = {},
                bool include_sweeps = true);

// Renders SVG charts from the CSVs present in a run directory.
void emit_outputs(const std::string& run_dir);

// CSV helpers shared by the runner and the CLI.
void write_decision_csv(const std::string& path, std::uint64_t config_hash,
                        const std::vector<DecisionRow>& rows);
void write_curve_csv(const std::string& path, std::uint64_t config_hash,
                     const std::vector<rl::CurveRow>& rows);
void write_sweep_csv(const std::string& path, std::uint64_t config_hash,
                     const std::string& axis_name, const SweepResult& result);
void write_arr_csv(const std::string& path, std::uint64_t config_hash,
                   const ArrResult& result);

}  // namespace risctl::experiments
