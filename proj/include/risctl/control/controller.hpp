#pragma once

#include <optional>
#include <vector>

#include "risctl/channel/model.hpp"
#include "risctl/diffusion/sampler.hpp"
#include "risctl/traj/trajectory.hpp"

namespace risctl::control {

using channel::CsiSnapshot;
using channel::PhaseConfig;
using channel::RisActivation;
using channel::Scene;

// Output of one control interval: phases, the ON/OFF vector, the predicted
// rates behind the decision, and the per-RIS marginal rate gains recorded
// during the sweep.
struct ControlDecision {
    PhaseConfig phases;
    RisActivation activation;
    double ar_on = 0.0;   // all-ON rate at the chosen phases
    double ar_off = 0.0;  // rate with every RIS off
    std::vector<double> per_ris_marginals;
};

// Greedy ON/OFF sweep in ascending RIS index order starting from all-ON:
// RIS i stays ON iff the rate with v_i = 1 (given already-decided lower
// indices, higher indices still ON) is >= the rate with v_i = 0. Ties keep
// the RIS ON. A final comparison against the all-OFF rate guarantees the
// result never falls below either anchor; with a single RIS the sweep is
// exactly the on/off rate comparison.
ControlDecision decide_onoff(const CsiSnapshot& csi, const PhaseConfig& phases,
                             const Scene& scene);

enum class BaselineMode {
    always_on,
    all_off,
    random_phase,
    aligned_oracle,
    disk_oracle,
    exhaustive_quantized,
    euclidean_diffusion,
};

BaselineMode baseline_mode_from_string(const std::string& s);
std::string to_string(BaselineMode m);

struct BaselineOptions {
    int quantize_bits = 2;  // exhaustive search grid
    int disk_grid = 201;    // disk oracle: grid points per axis
    diffusion::Denoiser* policy = nullptr;            // always_on, euclidean
    const diffusion::DiffusionSchedule* schedule = nullptr;
    diffusion::Guidance guidance = diffusion::Guidance::on;
    Rng* rng = nullptr;  // random_phase, policy-backed modes
};

// Reference configurations. Oracle modes exploit the fact that the rate
// depends on each RIS only through its complex element sum:
//   aligned_oracle      per-RIS phase arg(h_l) - arg(h_i h_li), interference
//                       ignored
//   disk_oracle         per-RIS search over the sum S on the |S| <= N disk
//                       (grid + local refinement, coordinate sweeps across
//                       RISs until no improvement; the aligned point seeds
//                       the candidate set)
//   exhaustive_quantized exact maximum over all b-bit phase combinations
//   euclidean_diffusion  the policy sampler run in ambient space
// always_on/euclidean_diffusion need a policy in the options; activation is
// all-ON for every mode except all_off.
ControlDecision baseline_configure(const CsiSnapshot& csi, const Scene& scene,
                                   BaselineMode mode,
                                   const BaselineOptions& opts = {});

// Phases of one RIS row realizing a target element sum with |s| <= N.
std::vector<double> phases_for_sum(channel::cplx s, int n);

// arg(h_l) - arg(h_i h_li) wrapped to [0, 2pi).
double alignment_angle(const CsiSnapshot& csi, int ris);

enum class ActivationPolicy { decide, all_on, all_off };

// The trained pieces plus decision-time options of the control pipeline.
struct PipelineModels {
    traj::PredictorModel* predictor = nullptr;  // nullptr: perfect prediction
    diffusion::Denoiser* denoiser = nullptr;
    const diffusion::DiffusionSchedule* schedule = nullptr;
    diffusion::Guidance guidance = diffusion::Guidance::on;
    diffusion::ManifoldMode manifold = diffusion::ManifoldMode::torus;
    int quantize_bits = 0;  // 0 keeps continuous phases
    ActivationPolicy activation = ActivationPolicy::decide;
    std::optional<BaselineMode> phase_override;  // baseline phases instead of
                                                 // the learned sampler
    BaselineOptions baseline_opts;
};

// Per-user motion history (most recent last) plus the realized positions of
// the interval being decided.
struct IntervalInput {
    std::vector<traj::KinematicSample> target_history;
    std::vector<std::vector<traj::KinematicSample>> interferer_histories;
    Vec2 target_true;
    std::vector<Vec2> interferer_true;
    int horizon = 1;  // prediction steps ahead
};

struct IntervalResult {
    ControlDecision decision;
    double predicted_ar = 0.0;  // decision-time rate, predicted CSI
    double realized_ar = 0.0;   // same configuration on the true CSI
};

// One full control interval: predict positions, reconstruct CSI, generate
// phases, optionally quantize, decide ON/OFF, then score the chosen
// configuration on the true positions.
IntervalResult control_interval(const PipelineModels& models, const Scene& scene,
                                const IntervalInput& input, Rng& rng);

}  // namespace risctl::control
