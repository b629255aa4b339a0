#include "risctl/experiments/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace risctl::experiments {

namespace {

constexpr double kMinSeparation = 0.5;

bool too_close(const Vec2& p, const channel::Scene& scene) {
    if (distance(p, scene.bs_pos) < kMinSeparation) return true;
    for (const Vec2& r : scene.ris_pos)
        if (distance(p, r) < kMinSeparation) return true;
    return false;
}

Vec2 draw_annulus(const Vec2& center, double rmin, double rmax,
                  const channel::Scene& scene, Rng& rng) {
    for (int tries = 0; tries < 64; ++tries) {
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double r = std::sqrt(
            rng.uniform(rmin * rmin, rmax * rmax));  // area-uniform
        const Vec2 p{center.x + r * std::cos(ang), center.y + r * std::sin(ang)};
        if (!too_close(p, scene)) return p;
    }
    throw DegenerateGeometry("draw_annulus: no admissible position found");
}

Vec2 draw_near_ris(const channel::Scene& scene, Rng& rng) {
    for (int tries = 0; tries < 64; ++tries) {
        const Vec2& ris = scene.ris_pos[rng.uniform_int(scene.num_ris())];
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double r = rng.uniform(kMinSeparation, 3.0);
        const Vec2 p{ris.x + r * std::cos(ang), ris.y + r * std::sin(ang)};
        if (!too_close(p, scene)) return p;
    }
    throw DegenerateGeometry("draw_near_ris: no admissible position found");
}

// Smooth bounded random walk: heading diffuses, speed wanders inside the
// configured band, radius reflected back into the annulus.
std::vector<Vec2> smooth_walk(const ExperimentConfig& cfg,
                              const channel::Scene& scene, double rmin,
                              double rmax, int steps, Rng& rng) {
    std::vector<Vec2> path(steps);
    Vec2 p = draw_annulus(scene.bs_pos, rmin, rmax, scene, rng);
    double heading = rng.uniform(0.0, 2.0 * M_PI);
    double speed = rng.uniform(cfg.trajectory.speed_min, cfg.trajectory.speed_max);
    for (int t = 0; t < steps; ++t) {
        path[t] = p;
        heading += 0.15 * rng.normal();
        speed = std::clamp(speed + 0.1 * rng.normal(), cfg.trajectory.speed_min,
                           cfg.trajectory.speed_max);
        Vec2 next{p.x + speed * cfg.trajectory.dt * std::cos(heading),
                  p.y + speed * cfg.trajectory.dt * std::sin(heading)};
        const double r = distance(next, scene.bs_pos);
        if (r < rmin || r > rmax || too_close(next, scene)) {
            // steer back toward the middle of the band
            const double mid = 0.5 * (rmin + rmax);
            heading = std::atan2(scene.bs_pos.y + (next.y - scene.bs_pos.y) *
                                         mid / std::max(r, 1e-6) - p.y,
                                 scene.bs_pos.x + (next.x - scene.bs_pos.x) *
                                         mid / std::max(r, 1e-6) - p.x);
            next = {p.x + speed * cfg.trajectory.dt * std::cos(heading),
                    p.y + speed * cfg.trajectory.dt * std::sin(heading)};
            if (too_close(next, scene)) next = p;
        }
        p = next;
    }
    return path;
}

// Constant-velocity line that passes within ~1.5 m of a chosen RIS around
// the middle of the episode.
std::vector<Vec2> crosser_line(const ExperimentConfig& cfg,
                               const channel::Scene& scene, int steps,
                               Rng& rng) {
    const Vec2& ris = scene.ris_pos[rng.uniform_int(scene.num_ris())];
    const double offset_ang = rng.uniform(0.0, 2.0 * M_PI);
    const double offset = rng.uniform(kMinSeparation, 1.5);
    const Vec2 waypoint{ris.x + offset * std::cos(offset_ang),
                        ris.y + offset * std::sin(offset_ang)};
    const double heading = rng.uniform(0.0, 2.0 * M_PI);
    const double speed =
        rng.uniform(cfg.trajectory.speed_min, cfg.trajectory.speed_max);
    const double t_cross = steps * rng.uniform(0.35, 0.65);
    std::vector<Vec2> path(steps);
    for (int t = 0; t < steps; ++t) {
        const double dtc = (t - t_cross) * cfg.trajectory.dt;
        Vec2 p{waypoint.x + speed * dtc * std::cos(heading),
               waypoint.y + speed * dtc * std::sin(heading)};
        if (too_close(p, scene)) p.x += 2.0 * kMinSeparation;
        path[t] = p;
    }
    return path;
}

}  // namespace

diffusion::Observation sample_training_observation(const ExperimentConfig& cfg,
                                                   const channel::Scene& scene,
                                                   int num_interferers,
                                                   Rng& rng) {
    const Vec2 target =
        draw_annulus(scene.bs_pos, cfg.trajectory.target_radius_min,
                     cfg.trajectory.target_radius_max, scene, rng);
    std::vector<Vec2> interferers(num_interferers);
    for (int m = 0; m < num_interferers; ++m) {
        const bool crosser = rng.uniform() < cfg.trajectory.ris_crosser_fraction;
        interferers[m] =
            crosser ? draw_near_ris(scene, rng)
                    : draw_annulus(scene.bs_pos,
                                   cfg.trajectory.interferer_radius_min,
                                   cfg.trajectory.interferer_radius_max, scene,
                                   rng);
    }
    const channel::CsiSnapshot csi =
        channel::snapshot_from_positions(target, interferers, scene);
    return diffusion::make_observation(csi, scene);
}

EvalEpisode make_eval_episode(const ExperimentConfig& cfg,
                              const channel::Scene& scene, int num_interferers,
                              int steps, Rng& rng) {
    EvalEpisode ep;
    ep.target = smooth_walk(cfg, scene, cfg.trajectory.target_radius_min,
                            cfg.trajectory.target_radius_max, steps, rng);
    for (int m = 0; m < num_interferers; ++m) {
        const bool crosser = rng.uniform() < cfg.trajectory.ris_crosser_fraction;
        ep.interferers.push_back(
            crosser ? crosser_line(cfg, scene, steps, rng)
                    : smooth_walk(cfg, scene, cfg.trajectory.interferer_radius_min,
                                  cfg.trajectory.interferer_radius_max, steps,
                                  rng));
    }
    return ep;
}

std::vector<std::vector<traj::KinematicSample>> synthetic_training_traces(
    const ExperimentConfig& cfg, int count, int length, Rng& rng) {
    std::vector<std::vector<traj::KinematicSample>> traces;
    traces.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto path =
            smooth_walk(cfg, cfg.scene, cfg.trajectory.target_radius_min,
                        cfg.trajectory.target_radius_max, length, rng);
        traces.push_back(traj::kinematic_features(path, cfg.trajectory.dt));
    }
    return traces;
}

std::vector<std::vector<traj::KinematicSample>> fixture_traces(
    const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(cfg.trajectory.fixture_dir))
        if (entry.path().extension() == ".plt")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ConfigError("no .plt fixtures found in " +
                          cfg.trajectory.fixture_dir);

    std::vector<std::vector<traj::KinematicSample>> traces;
    for (const std::string& f : files) {
        const auto points = traj::parse_plt_file(f);
        if (points.size() < 2) continue;
        const auto planar = traj::local_projection(points, points.front());
        std::vector<double> times(points.size());
        for (size_t i = 0; i < points.size(); ++i) times[i] = points[i].t;
        const auto uniform =
            traj::resample_uniform(planar, times, cfg.trajectory.dt);
        if (static_cast<int>(uniform.size()) > cfg.trajectory.history + 1)
            traces.push_back(
                traj::kinematic_features(uniform, cfg.trajectory.dt));
    }
    if (traces.empty())
        throw ConfigError("fixtures in " + cfg.trajectory.fixture_dir +
                          " are too short for the configured window");
    return traces;
}

}  // namespace risctl::experiments
