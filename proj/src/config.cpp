#include "risctl/experiments/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace risctl::experiments {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Collects complaints instead of failing fast so a bad config is reported
// in one shot.
struct Checker {
    std::vector<std::string> bad;

    void check(bool ok, const std::string& field) {
        if (!ok) bad.push_back(field);
    }
    void finish() const {
        if (bad.empty()) return;
        std::string msg = "invalid config field(s): ";
        for (size_t i = 0; i < bad.size(); ++i)
            msg += (i ? ", " : "") + bad[i];
        throw ConfigError(msg);
    }
};

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

diffusion::DiffusionSchedule ExperimentConfig::make_schedule() const {
    return make_schedule(policy.schedule, policy.steps);
}

diffusion::DiffusionSchedule ExperimentConfig::make_schedule(
    const std::string& kind, int steps) const {
    return diffusion::build_schedule(diffusion::schedule_kind_from_string(kind),
                                     steps, policy.eta);
}

std::string config_hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    Checker ck;

    get_if(j, "schema_version", cfg.schema_version);
    ck.check(cfg.schema_version == 1, "schema_version (must be 1)");

    int num_ris = 2;
    cfg.scene.elements_per_ris = 16;  // desk-scale default
    if (j.contains("scene")) {
        const json& s = j.at("scene");
        get_if(s, "num_ris", num_ris);
        get_if(s, "elements_per_ris", cfg.scene.elements_per_ris);
        get_if(s, "ris_ring_radius_m", cfg.ris_ring_radius);
        get_if(s, "wavelength_m", cfg.scene.wavelength);
        get_if(s, "pathloss_exponent", cfg.scene.pathloss_exp);
        get_if(s, "tx_power_w", cfg.scene.tx_power);
        get_if(s, "noise_power_w", cfg.scene.noise_power);
        get_if(s, "incidence_efficiency", cfg.scene.incidence_efficiency);
    }
    ck.check(num_ris >= 1, "scene.num_ris");
    ck.check(cfg.scene.elements_per_ris >= 1, "scene.elements_per_ris");
    ck.check(cfg.ris_ring_radius > 0.0, "scene.ris_ring_radius_m");
    ck.check(cfg.scene.wavelength > 0.0, "scene.wavelength_m");
    ck.check(cfg.scene.pathloss_exp >= 1.0, "scene.pathloss_exponent");
    ck.check(cfg.scene.tx_power > 0.0, "scene.tx_power_w");
    ck.check(cfg.scene.noise_power > 0.0, "scene.noise_power_w");
    if (ck.bad.empty())
        cfg.scene.ris_pos = channel::Scene::ring_positions(
            cfg.scene.bs_pos, cfg.ris_ring_radius, num_ris);

    if (j.contains("trajectory")) {
        const json& t = j.at("trajectory");
        get_if(t, "source", cfg.trajectory.source);
        get_if(t, "fixture_dir", cfg.trajectory.fixture_dir);
        get_if(t, "dt_s", cfg.trajectory.dt);
        get_if(t, "history", cfg.trajectory.history);
        get_if(t, "horizon", cfg.trajectory.horizon);
        get_if(t, "speed_min_mps", cfg.trajectory.speed_min);
        get_if(t, "speed_max_mps", cfg.trajectory.speed_max);
        get_if(t, "target_radius_min_m", cfg.trajectory.target_radius_min);
        get_if(t, "target_radius_max_m", cfg.trajectory.target_radius_max);
        get_if(t, "interferer_radius_min_m", cfg.trajectory.interferer_radius_min);
        get_if(t, "interferer_radius_max_m", cfg.trajectory.interferer_radius_max);
        get_if(t, "ris_crosser_fraction", cfg.trajectory.ris_crosser_fraction);
    }
    ck.check(cfg.trajectory.source == "synthetic" ||
                 cfg.trajectory.source == "fixtures",
             "trajectory.source");
    ck.check(cfg.trajectory.dt > 0.0, "trajectory.dt_s");
    ck.check(cfg.trajectory.history >= 2, "trajectory.history");
    ck.check(cfg.trajectory.horizon >= 1, "trajectory.horizon");
    ck.check(cfg.trajectory.speed_min > 0.0 &&
                 cfg.trajectory.speed_max >= cfg.trajectory.speed_min,
             "trajectory.speed range");
    ck.check(cfg.trajectory.target_radius_min > 0.0 &&
                 cfg.trajectory.target_radius_max >
                     cfg.trajectory.target_radius_min,
             "trajectory.target_radius range");
    ck.check(cfg.trajectory.ris_crosser_fraction >= 0.0 &&
                 cfg.trajectory.ris_crosser_fraction <= 1.0,
             "trajectory.ris_crosser_fraction");

    if (j.contains("predictor")) {
        const json& p = j.at("predictor");
        get_if(p, "hidden", cfg.predictor.hidden);
        get_if(p, "epochs", cfg.predictor.epochs);
        get_if(p, "batch", cfg.predictor.batch);
        get_if(p, "lr", cfg.predictor.lr);
    }
    ck.check(cfg.predictor.hidden >= 1, "predictor.hidden");
    ck.check(cfg.predictor.epochs >= 1, "predictor.epochs");
    ck.check(cfg.predictor.batch >= 1, "predictor.batch");
    ck.check(cfg.predictor.lr > 0.0, "predictor.lr");

    if (j.contains("policy")) {
        const json& p = j.at("policy");
        get_if(p, "width", cfg.policy.width);
        get_if(p, "ff_hidden", cfg.policy.ff_hidden);
        get_if(p, "time_dim", cfg.policy.time_dim);
        get_if(p, "steps", cfg.policy.steps);
        get_if(p, "schedule", cfg.policy.schedule);
        get_if(p, "eta", cfg.policy.eta);
        get_if(p, "guidance", cfg.policy.guidance);
        get_if(p, "quantize_bits", cfg.policy.quantize_bits);
    }
    ck.check(cfg.policy.width >= 1, "policy.width");
    ck.check(cfg.policy.ff_hidden >= 1, "policy.ff_hidden");
    ck.check(cfg.policy.time_dim >= 2 && cfg.policy.time_dim % 2 == 0,
             "policy.time_dim");
    ck.check(cfg.policy.steps >= 1, "policy.steps");
    ck.check(cfg.policy.schedule == "vp" || cfg.policy.schedule == "linear" ||
                 cfg.policy.schedule == "cosine",
             "policy.schedule");
    ck.check(cfg.policy.eta >= 0.0, "policy.eta");
    ck.check(cfg.policy.quantize_bits >= 0 && cfg.policy.quantize_bits <= 8,
             "policy.quantize_bits");

    if (j.contains("training")) {
        const json& t = j.at("training");
        get_if(t, "env_steps", cfg.training.env_steps);
        get_if(t, "batch", cfg.training.batch);
        get_if(t, "actor_batch", cfg.training.actor_batch);
        get_if(t, "warmup", cfg.training.warmup);
        get_if(t, "delay", cfg.training.delay);
        std::int64_t cap = static_cast<std::int64_t>(cfg.training.capacity);
        get_if(t, "capacity", cap);
        cfg.training.capacity = static_cast<size_t>(cap);
        get_if(t, "actor_lr", cfg.training.actor_lr);
        get_if(t, "critic_lr", cfg.training.critic_lr);
        get_if(t, "critic_hidden", cfg.training.critic_hidden);
        get_if(t, "explore_start", cfg.training.explore_start);
        get_if(t, "explore_end", cfg.training.explore_end);
    }
    cfg.training.guidance = cfg.policy.guidance ? diffusion::Guidance::on
                                                : diffusion::Guidance::off;
    ck.check(cfg.training.env_steps >= 0, "training.env_steps");
    ck.check(cfg.training.batch >= 1, "training.batch");
    ck.check(cfg.training.actor_batch >= 1, "training.actor_batch");
    ck.check(cfg.training.warmup >= 1, "training.warmup");
    ck.check(cfg.training.delay >= 1, "training.delay");
    ck.check(cfg.training.capacity >= 1, "training.capacity");
    ck.check(cfg.training.actor_lr > 0.0, "training.actor_lr");
    ck.check(cfg.training.critic_lr > 0.0, "training.critic_lr");
    ck.check(cfg.training.critic_hidden >= 1, "training.critic_hidden");
    ck.check(cfg.training.explore_start > 0.0 && cfg.training.explore_end > 0.0,
             "training.explore range");

    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        get_if(e, "intervals", cfg.evaluation.intervals);
        get_if(e, "num_interferers", cfg.evaluation.num_interferers);
        get_if(e, "policies", cfg.evaluation.policies);
    }
    ck.check(cfg.evaluation.intervals >= 1, "evaluation.intervals");
    ck.check(cfg.evaluation.num_interferers >= 0, "evaluation.num_interferers");
    ck.check(!cfg.evaluation.policies.empty(), "evaluation.policies (empty)");

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        get_if(s, "power_w", cfg.sweep.power_w);
        get_if(s, "elements", cfg.sweep.elements);
        get_if(s, "interferer_counts", cfg.sweep.interferer_counts);
        get_if(s, "schedules", cfg.sweep.schedules);
        get_if(s, "step_counts", cfg.sweep.step_counts);
    }
    ck.check(!cfg.sweep.power_w.empty(), "sweep.power_w (empty)");
    ck.check(!cfg.sweep.elements.empty(), "sweep.elements (empty)");
    ck.check(!cfg.sweep.interferer_counts.empty(),
             "sweep.interferer_counts (empty)");
    ck.check(!cfg.sweep.schedules.empty(), "sweep.schedules (empty)");
    ck.check(!cfg.sweep.step_counts.empty(), "sweep.step_counts (empty)");
    for (double p : cfg.sweep.power_w)
        ck.check(p > 0.0, "sweep.power_w (non-positive entry)");
    for (int n : cfg.sweep.elements)
        ck.check(n >= 1, "sweep.elements (entry < 1)");

    if (j.contains("seeds")) {
        std::vector<std::int64_t> seeds = j.at("seeds").get<std::vector<std::int64_t>>();
        for (auto s : seeds) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    ck.check(!cfg.seeds.empty(), "seeds (must be explicit and nonempty)");

    get_if(j, "out_dir", cfg.out_dir);
    ck.check(!cfg.out_dir.empty(), "out_dir");

    ck.finish();
    cfg.hash = fnv1a(j.dump());
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace risctl::experiments
