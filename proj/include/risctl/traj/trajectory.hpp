#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "risctl/common/error.hpp"
#include "risctl/common/rng.hpp"
#include "risctl/common/vec.hpp"
#include "risctl/nn/adam.hpp"
#include "risctl/nn/layers.hpp"

namespace risctl::traj {

struct GpsPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees
    double t = 0.0;    // unix seconds
};

// GeoLife .plt reader: exactly 6 header lines are skipped, then CSV rows
//   lat,lon,0,altitude_feet,serial_day,YYYY-MM-DD,HH:MM:SS
// Timestamps must be strictly increasing. Malformed rows raise ParseError
// with the 1-based row index.
std::vector<GpsPoint> parse_plt(std::istream& in);
std::vector<GpsPoint> parse_plt_file(const std::string& path);

// Writes the same layout back (altitude written as 0, serial day recomputed
// from t). Coordinate and date/time fields round-trip exactly for inputs
// with <= 6 decimal places.
void serialize_plt(std::ostream& out, std::span<const GpsPoint> points);

// Great-circle distance, spherical earth R = 6 371 000 m.
double haversine_distance(const GpsPoint& a, const GpsPoint& b);

// Equirectangular projection around an origin inside the trace:
//   x = R dlon cos(lat0), y = R dlat  (radians)
std::vector<Vec2> local_projection(std::span<const GpsPoint> points,
                                   const GpsPoint& origin);

struct KinematicSample {
    Vec2 q;
    double speed = 0.0;    // m/s
    double heading = 0.0;  // radians in [-pi, pi)
};

// Displacement-based speed and four-quadrant heading per step; the first
// sample carries speed = 0, heading = 0.
std::vector<KinematicSample> kinematic_features(std::span<const Vec2> trace,
                                                double dt);

// Linear resampling of (position, time) samples onto a uniform dt grid.
std::vector<Vec2> resample_uniform(std::span<const Vec2> pos,
                                   std::span<const double> t, double dt);

struct PredictorConfig {
    int history = 5;     // window length H
    int hidden = 64;
    int epochs = 20;
    int batch = 32;
    double lr = 1e-3;
    double dt = 1.0;     // seconds between samples
    std::uint64_t seed = 1;
};

// Two stacked LSTM layers and a linear head predicting the next planar
// position from a length-H window of (x, y, speed, cos heading, sin heading).
// Heading enters as its cos/sin pair to avoid the 2pi seam.
class PredictorModel {
public:
    PredictorModel() = default;
    PredictorModel(const PredictorConfig& cfg, Rng& rng);

    // Next-position estimate from the last H samples of `window`.
    Vec2 predict_next(std::span<const KinematicSample> window);

    // Recursive rollout: predictions are appended, features recomputed and
    // the window advanced. Deterministic.
    std::vector<Vec2> predict_rollout(std::span<const KinematicSample> history,
                                      int horizon_steps);

    int history() const { return history_; }
    double dt() const { return dt_; }

    std::vector<nn::ParamTensor*> params();
    void save(const std::string& path);
    static PredictorModel load(const std::string& path);

    // normalization helpers, exposed for tests
    std::array<double, 5> feature_mean{};
    std::array<double, 5> feature_scale{1, 1, 1, 1, 1};

private:
    friend PredictorModel train_predictor(
        const std::vector<std::vector<KinematicSample>>&, const PredictorConfig&,
        std::vector<double>*);

    nn::Tape::Var forward(nn::Tape& tape,
                          std::span<const KinematicSample> window);

    nn::LstmCell lstm1_, lstm2_;
    nn::DenseLayer head_;
    int history_ = 5;
    int hidden_ = 64;
    double dt_ = 1.0;
};

// Sliding-window MSE training with Adam. Throws when no trace is longer
// than the window, naming the shortest trace. Appends per-epoch mean loss
// to `loss_curve` when given.
PredictorModel train_predictor(
    const std::vector<std::vector<KinematicSample>>& traces,
    const PredictorConfig& cfg, std::vector<double>* loss_curve = nullptr);

}  // namespace risctl::traj
