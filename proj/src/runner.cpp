#include "risctl/experiments/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

namespace risctl::experiments {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_csv(const std::string& path, std::uint64_t hash,
                       const std::string& header) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open output file " + path);
    os << "# config_hash=" << config_hash_hex(hash) << "\n" << header << "\n";
    return os;
}

// stream ids so every consumer of the master seed gets its own lane
enum StreamId : std::uint64_t {
    kPredictorTraces = 1,
    kPredictorTrain = 2,
    kPolicyTrain = 3,
    kEuclideanTrain = 4,
    kEpisode = 5,
    kDecide = 6,
    kSweepBase = 1000,
    kArrBase = 5000,
};

// run a list of index-addressed jobs on a small pool; results land by index
void parallel_for(int count, const std::function<void(int)>& job) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                job(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<std::string> known_policies() {
    return {"tpgc",    "always_on", "all_off",  "random_phase",
            "tpc",     "aligned_on", "euclidean"};
}

TrainedPolicy train_policy(const ExperimentConfig& cfg,
                           const channel::Scene& scene, int num_interferers,
                           std::uint64_t seed, diffusion::ManifoldMode manifold) {
    Rng rng(seed);
    TrainedPolicy out;
    out.manifold = manifold;
    out.schedule = cfg.make_schedule();

    diffusion::DenoiserConfig dcfg;
    dcfg.action_dim = 2 * scene.elements_per_ris * scene.num_ris();
    dcfg.width = cfg.policy.width;
    dcfg.ff_hidden = cfg.policy.ff_hidden;
    dcfg.time_dim = cfg.policy.time_dim;
    out.denoiser = diffusion::Denoiser(dcfg, rng);

    const int obs_dim = (scene.num_ris() + 1) * diffusion::kTokenDim;
    out.critics = rl::CriticPair(obs_dim, dcfg.action_dim,
                                 cfg.training.critic_hidden, rng);

    rl::TrainConfig tcfg = cfg.training;
    tcfg.manifold = manifold;
    auto env = [&cfg, &scene, num_interferers](Rng& r) {
        return sample_training_observation(cfg, scene, num_interferers, r);
    };
    out.train_result =
        rl::train_loop(env, out.denoiser, out.critics, out.schedule, tcfg, rng);
    return out;
}

traj::PredictorModel train_predictor_from_config(const ExperimentConfig& cfg,
                                                 std::uint64_t seed,
                                                 std::vector<double>* loss_curve) {
    traj::PredictorConfig pcfg;
    pcfg.history = cfg.trajectory.history;
    pcfg.hidden = cfg.predictor.hidden;
    pcfg.epochs = cfg.predictor.epochs;
    pcfg.batch = cfg.predictor.batch;
    pcfg.lr = cfg.predictor.lr;
    pcfg.dt = cfg.trajectory.dt;
    pcfg.seed = Rng::derive(seed, kPredictorTrain);

    std::vector<std::vector<traj::KinematicSample>> traces;
    if (cfg.trajectory.source == "fixtures") {
        traces = fixture_traces(cfg);
    } else {
        Rng trng(Rng::derive(seed, kPredictorTraces));
        traces = synthetic_training_traces(cfg, 8, 240, trng);
    }
    return traj::train_predictor(traces, pcfg, loss_curve);
}

namespace {

control::PipelineModels models_for_policy(const ExperimentConfig& cfg,
                                          const std::string& policy,
                                          TrainedPolicy* learned,
                                          traj::PredictorModel* predictor) {
    control::PipelineModels m;
    m.predictor = predictor;
    m.guidance = cfg.policy.guidance ? diffusion::Guidance::on
                                     : diffusion::Guidance::off;
    m.quantize_bits = cfg.policy.quantize_bits;

    auto need_learned = [&] {
        require(learned != nullptr,
                "policy '" + policy + "' needs a trained sampler");
        m.denoiser = &learned->denoiser;
        m.schedule = &learned->schedule;
    };

    if (policy == "tpgc") {
        need_learned();
        m.activation = control::ActivationPolicy::decide;
    } else if (policy == "always_on") {
        need_learned();
        m.activation = control::ActivationPolicy::all_on;
    } else if (policy == "all_off") {
        m.phase_override = control::BaselineMode::all_off;
        m.activation = control::ActivationPolicy::all_off;
    } else if (policy == "random_phase") {
        m.phase_override = control::BaselineMode::random_phase;
        m.activation = control::ActivationPolicy::all_on;
    } else if (policy == "tpc") {
        m.phase_override = control::BaselineMode::aligned_oracle;
        m.activation = control::ActivationPolicy::decide;
    } else if (policy == "aligned_on") {
        m.phase_override = control::BaselineMode::aligned_oracle;
        m.activation = control::ActivationPolicy::all_on;
    } else if (policy == "euclidean") {
        need_learned();
        m.manifold = diffusion::ManifoldMode::euclidean;
        m.activation = control::ActivationPolicy::decide;
    } else {
        throw ConfigError("unknown evaluation policy '" + policy + "'");
    }
    return m;
}

std::string activation_string(const channel::RisActivation& act) {
    std::string s;
    for (size_t i = 0; i < act.v.size(); ++i) {
        if (i) s += ';';
        s += act.v[i] ? '1' : '0';
    }
    return s;
}

}  // namespace

std::vector<DecisionRow> evaluate_policy(const ExperimentConfig& cfg,
                                         const channel::Scene& scene,
                                         const std::string& policy,
                                         TrainedPolicy* learned,
                                         traj::PredictorModel* predictor,
                                         int num_interferers,
                                         std::uint64_t seed) {
    const int H = cfg.trajectory.history;
    const int horizon = cfg.trajectory.horizon;
    const int steps = H + cfg.evaluation.intervals + horizon;

    Rng ep_rng(Rng::derive(seed, kEpisode));
    const EvalEpisode ep =
        make_eval_episode(cfg, scene, num_interferers, steps, ep_rng);

    const auto target_feat =
        traj::kinematic_features(ep.target, cfg.trajectory.dt);
    std::vector<std::vector<traj::KinematicSample>> intf_feat;
    for (const auto& path : ep.interferers)
        intf_feat.push_back(traj::kinematic_features(path, cfg.trajectory.dt));

    control::PipelineModels models =
        models_for_policy(cfg, policy, learned, predictor);

    // one decision stream for all policies: policies that draw the same
    // number of variates per interval (tpgc / always_on) see identical
    // phases, which pairs their comparison
    Rng rng(Rng::derive(seed, kDecide));

    std::vector<DecisionRow> rows;
    rows.reserve(cfg.evaluation.intervals);
    for (int t = H; t < H + cfg.evaluation.intervals; ++t) {
        control::IntervalInput in;
        in.horizon = horizon;
        in.target_history.assign(target_feat.begin() + (t - H),
                                 target_feat.begin() + t);
        in.target_true = ep.target[t + horizon - 1];
        for (const auto& f : intf_feat) {
            in.interferer_histories.emplace_back(f.begin() + (t - H),
                                                 f.begin() + t);
        }
        for (const auto& path : ep.interferers)
            in.interferer_true.push_back(path[t + horizon - 1]);

        const control::IntervalResult res =
            control::control_interval(models, scene, in, rng);

        DecisionRow row;
        row.interval = t - H;
        row.activation = activation_string(res.decision.activation);
        row.ar_on = res.decision.ar_on;
        row.ar_off = res.decision.ar_off;
        row.realized_ar = res.realized_ar;
        row.realized_sinr = std::pow(2.0, res.realized_ar) - 1.0;
        row.policy = policy;
        row.seed = seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

SweepResult sweep(const ExperimentConfig& cfg, SweepMetric metric,
                  SweepAxis axis, const std::vector<std::string>& policies) {
    require(!policies.empty(), "sweep: empty policy list");
    const std::vector<double> axis_values = [&] {
        std::vector<double> v;
        if (axis == SweepAxis::power) {
            v = cfg.sweep.power_w;
        } else {
            for (int n : cfg.sweep.elements) v.push_back(n);
        }
        return v;
    }();

    const bool needs_learned =
        std::any_of(policies.begin(), policies.end(), [](const std::string& p) {
            return p == "tpgc" || p == "always_on" || p == "euclidean";
        });
    const bool needs_euclidean =
        std::count(policies.begin(), policies.end(), "euclidean") > 0;

    struct Point {
        double axis_value;
        int m;
        std::uint64_t seed;
        size_t seed_idx;
    };
    std::vector<Point> points;
    for (double av : axis_values)
        for (int m : cfg.sweep.interferer_counts)
            for (size_t si = 0; si < cfg.seeds.size(); ++si)
                points.push_back({av, m, cfg.seeds[si], si});

    // policies trained once per (seed, axis point when N changes); power
    // points reuse the seed's policy trained on the base scene
    struct SeedArtifacts {
        std::unique_ptr<TrainedPolicy> torus;
        std::unique_ptr<TrainedPolicy> euclid;
        std::unique_ptr<traj::PredictorModel> predictor;
    };
    std::map<std::pair<std::uint64_t, int>, SeedArtifacts> cache;

    auto scene_for = [&](double axis_value) {
        channel::Scene s = cfg.scene;
        if (axis == SweepAxis::power)
            s.tx_power = axis_value;
        else
            s.elements_per_ris = static_cast<int>(axis_value);
        return s;
    };

    // training cache key: elements axis trains per N, power axis per seed
    for (const Point& p : points) {
        const int key_n = axis == SweepAxis::elements
                              ? static_cast<int>(p.axis_value)
                              : cfg.scene.elements_per_ris;
        auto key = std::make_pair(p.seed, key_n);
        if (cache.find(key) != cache.end()) continue;
        cache.emplace(key, SeedArtifacts{});
    }
    std::vector<std::pair<std::uint64_t, int>> keys;
    for (auto& [k, v] : cache) keys.push_back(k);
    parallel_for(static_cast<int>(keys.size()), [&](int idx) {
        const auto& [seed, n] = keys[idx];
        SeedArtifacts& art = cache.at(keys[idx]);
        channel::Scene s = cfg.scene;
        s.elements_per_ris = n;
        art.predictor = std::make_unique<traj::PredictorModel>(
            train_predictor_from_config(cfg, seed));
        if (needs_learned)
            art.torus = std::make_unique<TrainedPolicy>(
                train_policy(cfg, s, cfg.evaluation.num_interferers,
                             Rng::derive(seed, kPolicyTrain + n)));
        if (needs_euclidean)
            art.euclid = std::make_unique<TrainedPolicy>(
                train_policy(cfg, s, cfg.evaluation.num_interferers,
                             Rng::derive(seed, kEuclideanTrain + n),
                             diffusion::ManifoldMode::euclidean));
    });

    std::vector<std::vector<DecisionRow>> all_rows(points.size() *
                                                   policies.size());
    parallel_for(static_cast<int>(points.size()), [&](int idx) {
        const Point& p = points[idx];
        const channel::Scene s = scene_for(p.axis_value);
        const int key_n = axis == SweepAxis::elements
                              ? static_cast<int>(p.axis_value)
                              : cfg.scene.elements_per_ris;
        SeedArtifacts& art = cache.at(std::make_pair(p.seed, key_n));
        // episodes are paired across the axis: the same (seed, m) sees the
        // same geometry at every axis value and for every policy
        const std::uint64_t point_seed =
            Rng::derive(p.seed, kSweepBase + static_cast<std::uint64_t>(p.m));
        for (size_t pi = 0; pi < policies.size(); ++pi) {
            const std::string& pol = policies[pi];
            TrainedPolicy* learned =
                pol == "euclidean" ? art.euclid.get() : art.torus.get();
            all_rows[idx * policies.size() + pi] = evaluate_policy(
                cfg, s, pol, learned, art.predictor.get(), p.m, point_seed);
        }
    });

    SweepResult result;
    result.axis_values = axis_values;
    for (double av : axis_values) {
        for (int m : cfg.sweep.interferer_counts) {
            for (size_t pi = 0; pi < policies.size(); ++pi) {
                double sum = 0.0, sq = 0.0;
                int n = 0;
                for (size_t idx = 0; idx < points.size(); ++idx) {
                    if (points[idx].axis_value != av || points[idx].m != m)
                        continue;
                    for (const DecisionRow& row :
                         all_rows[idx * policies.size() + pi]) {
                        const double v = metric == SweepMetric::ar
                                             ? row.realized_ar
                                             : row.realized_sinr;
                        sum += v;
                        sq += v * v;
                        ++n;
                    }
                }
                SweepCell cell;
                cell.axis_value = av;
                cell.num_interferers = m;
                cell.policy = policies[pi];
                cell.n = n;
                cell.mean = n ? sum / n : 0.0;
                cell.stddev =
                    n > 1 ? std::sqrt(std::max(0.0, sq / n - cell.mean * cell.mean))
                          : 0.0;
                result.cells.push_back(cell);
            }
        }
    }
    for (auto& rows : all_rows)
        result.decisions.insert(result.decisions.end(), rows.begin(), rows.end());
    return result;
}

ArrResult arr_matrix(const ExperimentConfig& cfg) {
    const std::vector<int>& counts = cfg.sweep.interferer_counts;
    const std::uint64_t master = cfg.seeds.front();

    ArrResult result;
    result.counts = counts;

    std::vector<std::unique_ptr<TrainedPolicy>> policies(counts.size());
    parallel_for(static_cast<int>(counts.size()), [&](int i) {
        policies[i] = std::make_unique<TrainedPolicy>(train_policy(
            cfg, cfg.scene, counts[i],
            Rng::derive(master, kArrBase + static_cast<std::uint64_t>(i))));
    });

    // matched-environment means come from their own evaluation stream
    std::vector<double> matched(counts.size(), 0.0);
    auto mean_ar = [&](TrainedPolicy& pol, int m_test, std::uint64_t seed,
                       std::vector<DecisionRow>& sink, const char* tag) {
        std::vector<DecisionRow> rows = evaluate_policy(
            cfg, cfg.scene, "tpgc", &pol, nullptr, m_test, seed);
        double sum = 0.0;
        for (DecisionRow& r : rows) {
            r.policy = tag;
            sum += r.realized_ar;
        }
        sink.insert(sink.end(), rows.begin(), rows.end());
        return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
    };

    std::vector<std::vector<DecisionRow>> row_sink(counts.size() * (counts.size() + 1));
    std::vector<double> arr_test(counts.size() * counts.size(), 0.0);
    parallel_for(static_cast<int>(counts.size()), [&](int i) {
        char tag[64];
        std::snprintf(tag, sizeof(tag), "train_m%d_matched", counts[i]);
        matched[i] = mean_ar(
            *policies[i], counts[i],
            Rng::derive(master, kArrBase + 100 + static_cast<std::uint64_t>(i)),
            row_sink[i * (counts.size() + 1)], tag);
        for (size_t jj = 0; jj < counts.size(); ++jj) {
            std::snprintf(tag, sizeof(tag), "train_m%d_test_m%d", counts[i],
                          counts[jj]);
            arr_test[i * counts.size() + jj] = mean_ar(
                *policies[i], counts[jj],
                Rng::derive(master, kArrBase + 200 +
                                        static_cast<std::uint64_t>(
                                            i * counts.size() + jj)),
                row_sink[i * (counts.size() + 1) + 1 + jj], tag);
        }
    });

    for (size_t i = 0; i < counts.size(); ++i) {
        for (size_t jj = 0; jj < counts.size(); ++jj) {
            ArrEntry e;
            e.m_train = counts[i];
            e.m_test = counts[jj];
            e.ar_test = arr_test[i * counts.size() + jj];
            e.ar_matched = matched[i];
            require(e.ar_matched > 0.0, "arr_matrix: zero matched rate");
            e.arr = e.ar_test / e.ar_matched;
            result.entries.push_back(e);
        }
    }
    for (auto& rows : row_sink)
        result.decisions.insert(result.decisions.end(), rows.begin(), rows.end());
    return result;
}

void write_decision_csv(const std::string& path, std::uint64_t hash,
                        const std::vector<DecisionRow>& rows) {
    auto os = open_csv(path, hash,
                       "interval,activation,ar_on,ar_off,realized_ar,"
                       "realized_sinr,policy,seed");
    for (const DecisionRow& r : rows)
        os << r.interval << ',' << r.activation << ',' << fmt(r.ar_on) << ','
           << fmt(r.ar_off) << ',' << fmt(r.realized_ar) << ','
           << fmt(r.realized_sinr) << ',' << r.policy << ',' << r.seed << "\n";
}

void write_curve_csv(const std::string& path, std::uint64_t hash,
                     const std::vector<rl::CurveRow>& rows) {
    auto os = open_csv(path, hash, "step,mean_reward,q1_loss,q2_loss");
    for (const rl::CurveRow& r : rows)
        os << r.step << ',' << fmt(r.mean_reward) << ',' << fmt(r.q1_loss)
           << ',' << fmt(r.q2_loss) << "\n";
}

void write_sweep_csv(const std::string& path, std::uint64_t hash,
                     const std::string& axis_name, const SweepResult& result) {
    auto os = open_csv(path, hash,
                       axis_name + ",num_interferers,policy,mean,stddev,n");
    for (const SweepCell& c : result.cells)
        os << fmt(c.axis_value) << ',' << c.num_interferers << ',' << c.policy
           << ',' << fmt(c.mean) << ',' << fmt(c.stddev) << ',' << c.n << "\n";
}

void write_arr_csv(const std::string& path, std::uint64_t hash,
                   const ArrResult& result) {
    auto os = open_csv(path, hash, "m_train,m_test,ar_test,ar_matched,arr");
    for (const ArrEntry& e : result.entries)
        os << e.m_train << ',' << e.m_test << ',' << fmt(e.ar_test) << ','
           << fmt(e.ar_matched) << ',' << fmt(e.arr) << "\n";
}

void run_config(const ExperimentConfig& cfg, const std::string& out_dir_override,
                std::optional<std::uint64_t> seed_override, bool include_sweeps) {
    const std::string out =
        out_dir_override.empty() ? cfg.out_dir : out_dir_override;
    fs::create_directories(out);
    ExperimentConfig run_cfg = cfg;
    if (seed_override.has_value()) run_cfg.seeds = {*seed_override};
    const std::uint64_t master = run_cfg.seeds.front();

    // predictor
    std::vector<double> pred_loss;
    traj::PredictorModel predictor =
        train_predictor_from_config(run_cfg, master, &pred_loss);
    predictor.save(out + "/predictor.ckpt");
    {
        auto os = open_csv(out + "/predictor_loss.csv", run_cfg.hash,
                           "epoch,mse");
        for (size_t e = 0; e < pred_loss.size(); ++e)
            os << e << ',' << fmt(pred_loss[e]) << "\n";
    }

    // policy
    TrainedPolicy policy =
        train_policy(run_cfg, run_cfg.scene, run_cfg.evaluation.num_interferers,
                     Rng::derive(master, kPolicyTrain));
    policy.denoiser.save(out + "/denoiser.ckpt");
    write_curve_csv(out + "/reward_curve.csv", run_cfg.hash,
                    policy.train_result.curve);

    std::unique_ptr<TrainedPolicy> euclid;
    if (std::count(run_cfg.evaluation.policies.begin(),
                   run_cfg.evaluation.policies.end(), "euclidean") > 0) {
        euclid = std::make_unique<TrainedPolicy>(train_policy(
            run_cfg, run_cfg.scene, run_cfg.evaluation.num_interferers,
            Rng::derive(master, kEuclideanTrain),
            diffusion::ManifoldMode::euclidean));
        euclid->denoiser.save(out + "/denoiser_euclidean.ckpt");
    }

    // decision logs, every seed x policy
    std::vector<DecisionRow> decisions;
    for (std::uint64_t seed : run_cfg.seeds) {
        for (const std::string& pol : run_cfg.evaluation.policies) {
            TrainedPolicy* learned =
                pol == "euclidean" ? euclid.get() : &policy;
            const auto rows = evaluate_policy(
                run_cfg, run_cfg.scene, pol, learned, &predictor,
                run_cfg.evaluation.num_interferers, seed);
            decisions.insert(decisions.end(), rows.begin(), rows.end());
        }
    }
    write_decision_csv(out + "/decisions.csv", run_cfg.hash, decisions);

    if (include_sweeps) {
        const SweepResult power = sweep(run_cfg, SweepMetric::ar,
                                        SweepAxis::power,
                                        run_cfg.evaluation.policies);
        write_sweep_csv(out + "/sweep_power.csv", run_cfg.hash, "power_w",
                        power);
        write_decision_csv(out + "/sweep_power_decisions.csv", run_cfg.hash,
                           power.decisions);
        const SweepResult elems = sweep(run_cfg, SweepMetric::sinr,
                                        SweepAxis::elements,
                                        run_cfg.evaluation.policies);
        write_sweep_csv(out + "/sweep_elements.csv", run_cfg.hash, "elements",
                        elems);
        write_decision_csv(out + "/sweep_elements_decisions.csv", run_cfg.hash,
                           elems.decisions);
    }

    nlohmann::json manifest;
    manifest["schema_version"] = run_cfg.schema_version;
    manifest["config_hash"] = config_hash_hex(run_cfg.hash);
    manifest["seeds"] = run_cfg.seeds;
    manifest["toolkit_version"] = "0.1.0";
    std::ofstream mos(out + "/manifest.json");
    mos << manifest.dump(2) << "\n";
}

}  // namespace risctl::experiments
