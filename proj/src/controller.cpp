#include "risctl/control/controller.hpp"

#include <cmath>
#include <functional>

#include "risctl/torus/torus.hpp"

namespace risctl::control {

namespace {

double rate(const CsiSnapshot& csi, const PhaseConfig& phases,
            const RisActivation& act, const Scene& scene) {
    return channel::achievable_rate(csi, phases, act, scene,
                                    channel::RateMode::on_config);
}

}  // namespace

ControlDecision decide_onoff(const CsiSnapshot& csi, const PhaseConfig& phases,
                             const Scene& scene) {
    const int R = csi.num_ris();
    ControlDecision d;
    d.phases = phases;
    d.activation = RisActivation::all_on(R);
    d.ar_on = rate(csi, phases, d.activation, scene);
    d.ar_off = channel::achievable_rate(csi, phases, d.activation, scene,
                                        channel::RateMode::all_off);
    d.per_ris_marginals.resize(R);

    RisActivation current = RisActivation::all_on(R);
    for (int i = 0; i < R; ++i) {
        current.v[i] = 1;
        const double ar_keep = rate(csi, phases, current, scene);
        current.v[i] = 0;
        const double ar_drop = rate(csi, phases, current, scene);
        d.per_ris_marginals[i] = ar_keep - ar_drop;
        current.v[i] = ar_keep >= ar_drop ? 1 : 0;
    }
    // never fall below the all-OFF anchor
    const double ar_current = rate(csi, phases, current, scene);
    if (d.ar_off > ar_current) current = RisActivation::all_off(R);
    d.activation = current;
    return d;
}

double alignment_angle(const CsiSnapshot& csi, int ris) {
    const channel::cplx cascade = csi.h_i[ris] * csi.h_li[ris];
    return torus::wrap_angle(std::arg(csi.h_l) - std::arg(cascade));
}

std::vector<double> phases_for_sum(channel::cplx s, int n) {
    require(n >= 1, "phases_for_sum: need at least one element");
    const double m = std::abs(s);
    require(m <= n + 1e-9, "phases_for_sum: |s| exceeds element count");
    const double psi = m > 0.0 ? std::arg(s) : 0.0;
    std::vector<double> theta(n, torus::wrap_angle(psi));
    if (n == 1) {
        // a single element realizes exactly the unit circle; |s| must be ~1
        // or 0 is unreachable, so spread is expressed by the angle alone
        require(std::fabs(m - 1.0) <= 1e-9 || m <= 1e-9,
                "phases_for_sum: single element cannot realize |s| != 1");
        if (m <= 1e-9) theta[0] = 0.0;  // degenerate, any angle
        return theta;
    }
    // pair elements at psi +- acos(m_pair) so each pair contributes
    // 2 cos(a) e^{j psi}; an odd element sits at psi and the pairs absorb
    // the remainder
    int pairs = n / 2;
    double target = m;
    if (n % 2 == 1) {
        if (target >= 1.0) {
            target -= 1.0;  // odd element at psi
        } else {
            // place the odd element opposite so the remainder is reachable
            theta[n - 1] = torus::wrap_angle(psi + M_PI);
            target += 1.0;
        }
    }
    const double per_pair = target / (2.0 * pairs);
    const double a = std::acos(std::clamp(per_pair, 0.0, 1.0));
    for (int p = 0; p < pairs; ++p) {
        theta[2 * p] = torus::wrap_angle(psi + a);
        theta[2 * p + 1] = torus::wrap_angle(psi - a);
    }
    return theta;
}

namespace {

// best sum per RIS by grid search over the disk plus pattern-search
// refinement; csi rate evaluated through sinr_from_sums
struct DiskSearch {
    const CsiSnapshot& csi;
    const Scene& scene;
    RisActivation act;
    std::vector<channel::cplx> sums;

    double eval() const {
        const double g = channel::sinr_from_sums(csi, act, scene, sums);
        return std::log2(1.0 + g);
    }

    double optimize_ris(int i, int grid, double radius) {
        double best = eval();
        channel::cplx best_s = sums[i];
        for (int a = 0; a < grid; ++a) {
            const double re = -radius + 2.0 * radius * a / (grid - 1);
            for (int b = 0; b < grid; ++b) {
                const double im = -radius + 2.0 * radius * b / (grid - 1);
                if (re * re + im * im > radius * radius) continue;
                sums[i] = {re, im};
                const double v = eval();
                if (v > best) {
                    best = v;
                    best_s = sums[i];
                }
            }
        }
        sums[i] = best_s;
        // compass pattern search down to fine resolution
        double step = 2.0 * radius / (grid - 1);
        while (step > 1e-10 * radius) {
            bool improved = false;
            const channel::cplx center = sums[i];
            const channel::cplx dirs[4] = {{step, 0}, {-step, 0}, {0, step},
                                           {0, -step}};
            for (const auto& d : dirs) {
                channel::cplx cand = center + d;
                if (std::abs(cand) > radius) continue;
                sums[i] = cand;
                const double v = eval();
                if (v > best) {
                    best = v;
                    improved = true;
                    break;
                }
            }
            if (!improved) {
                sums[i] = center;
                step *= 0.5;
            }
        }
        return best;
    }
};

ControlDecision finish_decision(const CsiSnapshot& csi, const Scene& scene,
                                PhaseConfig phases, RisActivation act) {
    ControlDecision d;
    d.ar_on = rate(csi, phases, RisActivation::all_on(csi.num_ris()), scene);
    d.ar_off = channel::achievable_rate(csi, phases, act, scene,
                                        channel::RateMode::all_off);
    d.phases = std::move(phases);
    d.activation = std::move(act);
    return d;
}

}  // namespace

BaselineMode baseline_mode_from_string(const std::string& s) {
    if (s == "always_on") return BaselineMode::always_on;
    if (s == "all_off") return BaselineMode::all_off;
    if (s == "random_phase") return BaselineMode::random_phase;
    if (s == "aligned_oracle") return BaselineMode::aligned_oracle;
    if (s == "disk_oracle") return BaselineMode::disk_oracle;
    if (s == "exhaustive_quantized") return BaselineMode::exhaustive_quantized;
    if (s == "euclidean_diffusion") return BaselineMode::euclidean_diffusion;
    throw ConfigError("unknown baseline mode '" + s + "'");
}

std::string to_string(BaselineMode m) {
    switch (m) {
        case BaselineMode::always_on: return "always_on";
        case BaselineMode::all_off: return "all_off";
        case BaselineMode::random_phase: return "random_phase";
        case BaselineMode::aligned_oracle: return "aligned_oracle";
        case BaselineMode::disk_oracle: return "disk_oracle";
        case BaselineMode::exhaustive_quantized: return "exhaustive_quantized";
        case BaselineMode::euclidean_diffusion: return "euclidean_diffusion";
    }
    return "?";
}

ControlDecision baseline_configure(const CsiSnapshot& csi, const Scene& scene,
                                   BaselineMode mode,
                                   const BaselineOptions& opts) {
    const int R = csi.num_ris();
    const int N = scene.elements_per_ris;
    PhaseConfig phases(R, N);

    switch (mode) {
        case BaselineMode::all_off:
            return finish_decision(csi, scene, phases,
                                   RisActivation::all_off(R));

        case BaselineMode::random_phase: {
            require(opts.rng != nullptr, "random_phase baseline needs an rng");
            for (double& th : phases.theta)
                th = opts.rng->uniform(0.0, 2.0 * M_PI);
            return finish_decision(csi, scene, phases, RisActivation::all_on(R));
        }

        case BaselineMode::always_on:
        case BaselineMode::euclidean_diffusion: {
            require(opts.policy != nullptr && opts.schedule != nullptr &&
                        opts.rng != nullptr,
                    "policy-backed baseline needs policy, schedule and rng");
            const auto manifold = mode == BaselineMode::euclidean_diffusion
                                      ? diffusion::ManifoldMode::euclidean
                                      : diffusion::ManifoldMode::torus;
            diffusion::Observation obs = diffusion::make_observation(csi, scene);
            diffusion::SampleResult res =
                diffusion::reverse_sample(*opts.policy, *opts.schedule, obs,
                                          *opts.rng, opts.guidance, 1.0,
                                          manifold);
            return finish_decision(csi, scene, res.phases,
                                   RisActivation::all_on(R));
        }

        case BaselineMode::aligned_oracle: {
            for (int i = 0; i < R; ++i) {
                const double th = alignment_angle(csi, i);
                for (int n = 0; n < N; ++n) phases.at(i, n) = th;
            }
            return finish_decision(csi, scene, phases, RisActivation::all_on(R));
        }

        case BaselineMode::disk_oracle: {
            require(opts.disk_grid >= 3, "disk_oracle: grid too small");
            DiskSearch search{csi, scene, RisActivation::all_on(R), {}};
            // seed with the aligned solution so the aligned point is always
            // in the candidate set
            search.sums.resize(R);
            for (int i = 0; i < R; ++i)
                search.sums[i] =
                    std::polar(static_cast<double>(N), alignment_angle(csi, i));
            double best = search.eval();
            for (int rounds = 0; rounds < 8; ++rounds) {
                double round_best = best;
                for (int i = 0; i < R; ++i)
                    round_best = search.optimize_ris(
                        i, opts.disk_grid, static_cast<double>(N));
                if (round_best <= best + 1e-13) {
                    best = round_best;
                    break;
                }
                best = round_best;
            }
            for (int i = 0; i < R; ++i) {
                const auto row = phases_for_sum(search.sums[i], N);
                for (int n = 0; n < N; ++n) phases.at(i, n) = row[n];
            }
            return finish_decision(csi, scene, phases, RisActivation::all_on(R));
        }

        case BaselineMode::exhaustive_quantized: {
            const int b = opts.quantize_bits;
            require(b >= 1 && b <= 8, "exhaustive_quantized: bits in [1, 8]");
            require(!(b >= 2 && N * R > 16),
                    "exhaustive_quantized: N*R too large for b >= 2");
            const int levels = 1 << b;
            // the rate depends on each RIS only through its element sum, so
            // enumerate level multiplicities instead of raw assignments
            std::vector<std::vector<std::vector<int>>> combos_per_ris(R);
            std::vector<int> counts(levels, 0);
            std::function<void(int, int, std::vector<std::vector<int>>&)> rec =
                [&](int level, int remaining,
                    std::vector<std::vector<int>>& out) {
                    if (level == levels - 1) {
                        counts[level] = remaining;
                        out.push_back(counts);
                        return;
                    }
                    for (int c = 0; c <= remaining; ++c) {
                        counts[level] = c;
                        rec(level + 1, remaining - c, out);
                    }
                };
            rec(0, N, combos_per_ris[0]);
            for (int i = 1; i < R; ++i) combos_per_ris[i] = combos_per_ris[0];

            DiskSearch search{csi, scene, RisActivation::all_on(R), {}};
            search.sums.assign(R, {0.0, 0.0});
            std::vector<channel::cplx> level_vec(levels);
            for (int l = 0; l < levels; ++l)
                level_vec[l] = std::polar(1.0, 2.0 * M_PI * l / levels);
            auto sum_of = [&](const std::vector<int>& cnt) {
                channel::cplx s{0.0, 0.0};
                for (int l = 0; l < levels; ++l)
                    s += static_cast<double>(cnt[l]) * level_vec[l];
                return s;
            };

            std::vector<size_t> pick(R, 0);
            std::vector<size_t> best_pick(R, 0);
            double best = -1.0;
            std::function<void(int)> enumerate = [&](int i) {
                if (i == R) {
                    const double v = search.eval();
                    if (v > best) {
                        best = v;
                        best_pick = pick;
                    }
                    return;
                }
                for (size_t c = 0; c < combos_per_ris[i].size(); ++c) {
                    pick[i] = c;
                    search.sums[i] = sum_of(combos_per_ris[i][c]);
                    enumerate(i + 1);
                }
            };
            enumerate(0);

            for (int i = 0; i < R; ++i) {
                const auto& cnt = combos_per_ris[i][best_pick[i]];
                int n = 0;
                for (int l = 0; l < levels; ++l)
                    for (int c = 0; c < cnt[l]; ++c)
                        phases.at(i, n++) = 2.0 * M_PI * l / levels;
            }
            return finish_decision(csi, scene, phases, RisActivation::all_on(R));
        }
    }
    throw Error("baseline_configure: unreachable");
}

IntervalResult control_interval(const PipelineModels& models, const Scene& scene,
                                const IntervalInput& input, Rng& rng) {
    // Stage 1: positions at the decision horizon
    Vec2 target_pred = input.target_true;
    std::vector<Vec2> intf_pred = input.interferer_true;
    if (models.predictor != nullptr) {
        require(!input.target_history.empty(),
                "control_interval: missing target history");
        target_pred =
            models.predictor->predict_rollout(input.target_history, input.horizon)
                .back();
        for (size_t m = 0; m < input.interferer_histories.size(); ++m)
            intf_pred[m] = models.predictor
                               ->predict_rollout(input.interferer_histories[m],
                                                 input.horizon)
                               .back();
    }

    // Stage 2: reconstruct CSI, generate phases, decide ON/OFF
    const CsiSnapshot predicted =
        channel::snapshot_from_positions(target_pred, intf_pred, scene);

    PhaseConfig phases;
    if (models.phase_override.has_value()) {
        BaselineOptions opts = models.baseline_opts;
        opts.policy = models.denoiser;
        opts.schedule = models.schedule;
        opts.rng = &rng;
        phases = baseline_configure(predicted, scene, *models.phase_override,
                                    opts)
                     .phases;
    } else {
        require(models.denoiser != nullptr && models.schedule != nullptr,
                "control_interval: policy not provided");
        diffusion::Observation obs =
            diffusion::make_observation(predicted, scene);
        diffusion::SampleResult res =
            diffusion::reverse_sample(*models.denoiser, *models.schedule, obs,
                                      rng, models.guidance, 1.0,
                                      models.manifold);
        phases = res.phases;
    }

    if (models.quantize_bits > 0) {
        const auto q = torus::quantize_phases(phases.theta, models.quantize_bits);
        phases.theta = q;
    }

    ControlDecision decision;
    switch (models.activation) {
        case ActivationPolicy::decide:
            decision = decide_onoff(predicted, phases, scene);
            break;
        case ActivationPolicy::all_on:
            decision = finish_decision(predicted, scene, phases,
                                       RisActivation::all_on(scene.num_ris()));
            break;
        case ActivationPolicy::all_off:
            decision = finish_decision(predicted, scene, phases,
                                       RisActivation::all_off(scene.num_ris()));
            break;
    }

    // Stage 3: score the chosen configuration on the realized positions
    IntervalResult out;
    out.predicted_ar = rate(predicted, decision.phases, decision.activation,
                            scene);
    const CsiSnapshot realized = channel::snapshot_from_positions(
        input.target_true, input.interferer_true, scene);
    out.realized_ar =
        rate(realized, decision.phases, decision.activation, scene);
    out.decision = std::move(decision);
    return out;
}

}  // namespace risctl::control
