#include "risctl/traj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "risctl/nn/checkpoint.hpp"

namespace risctl::traj {

namespace {

constexpr double kEarthRadius = 6371000.0;
constexpr double kDeg2Rad = M_PI / 180.0;

// days since 1970-01-01 for a civil date (proleptic Gregorian)
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<long>(era) * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += (m <= 2);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<GpsPoint> parse_plt(std::istream& in) {
    std::string line;
    for (int i = 0; i < 6; ++i) {
        if (!std::getline(in, line))
            throw ParseError("parse_plt: fewer than 6 header lines");
    }
    std::vector<GpsPoint> points;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split(line, ',');
        if (fields.size() != 7)
            throw ParseError("parse_plt: row " + std::to_string(row) +
                             ": expected 7 fields, got " +
                             std::to_string(fields.size()));
        GpsPoint p;
        if (!parse_double(fields[0], p.lat) || !parse_double(fields[1], p.lon))
            throw ParseError("parse_plt: row " + std::to_string(row) +
                             ": non-numeric coordinate");
        if (std::fabs(p.lat) > 90.0 || std::fabs(p.lon) > 180.0)
            throw ParseError("parse_plt: row " + std::to_string(row) +
                             ": coordinate out of range");
        int y, mo, d, hh, mm, ss;
        if (std::sscanf(fields[5].c_str(), "%d-%d-%d", &y, &mo, &d) != 3 ||
            std::sscanf(fields[6].c_str(), "%d:%d:%d", &hh, &mm, &ss) != 3)
            throw ParseError("parse_plt: row " + std::to_string(row) +
                             ": bad date/time");
        p.t = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 +
              hh * 3600.0 + mm * 60.0 + ss;
        if (!points.empty() && p.t <= points.back().t)
            throw ParseError("parse_plt: row " + std::to_string(row) +
                             ": non-monotone timestamp");
        points.push_back(p);
    }
    return points;
}

std::vector<GpsPoint> parse_plt_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("parse_plt: cannot open " + path);
    return parse_plt(in);
}

void serialize_plt(std::ostream& out, std::span<const GpsPoint> points) {
    out << "Geolife trajectory\n"
        << "WGS 84\n"
        << "Altitude is in Feet\n"
        << "Reserved 3\n"
        << "0,2,255,My Track,0,0,2,8421376\n"
        << "0\n";
    char buf[160];
    for (const GpsPoint& p : points) {
        const double serial = p.t / 86400.0 + 25569.0;  // days since 1899-12-30
        const long day = static_cast<long>(std::floor(p.t / 86400.0));
        const long sod = static_cast<long>(std::llround(p.t - day * 86400.0));
        int y, mo, d;
        civil_from_days(day, y, mo, d);
        std::snprintf(buf, sizeof(buf),
                      "%.6f,%.6f,0,0,%.10f,%04d-%02d-%02d,%02ld:%02ld:%02ld\n",
                      p.lat, p.lon, serial, y, mo, d, sod / 3600,
                      (sod % 3600) / 60, sod % 60);
        out << buf;
    }
}

double haversine_distance(const GpsPoint& a, const GpsPoint& b) {
    require(std::fabs(a.lat) <= 90.0 && std::fabs(b.lat) <= 90.0 &&
                std::fabs(a.lon) <= 180.0 && std::fabs(b.lon) <= 180.0,
            "haversine_distance: coordinate out of range");
    const double phi1 = a.lat * kDeg2Rad, phi2 = b.lat * kDeg2Rad;
    const double dphi = (b.lat - a.lat) * kDeg2Rad;
    const double dlam = (b.lon - a.lon) * kDeg2Rad;
    const double s = std::sin(dphi / 2.0), t = std::sin(dlam / 2.0);
    const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
    return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<Vec2> local_projection(std::span<const GpsPoint> points,
                                   const GpsPoint& origin) {
    const double cos0 = std::cos(origin.lat * kDeg2Rad);
    std::vector<Vec2> out(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        out[i].x = kEarthRadius * (points[i].lon - origin.lon) * kDeg2Rad * cos0;
        out[i].y = kEarthRadius * (points[i].lat - origin.lat) * kDeg2Rad;
    }
    return out;
}

std::vector<KinematicSample> kinematic_features(std::span<const Vec2> trace,
                                                double dt) {
    require(trace.size() >= 2, "kinematic_features: need at least 2 points");
    require(dt > 0.0, "kinematic_features: dt must be positive");
    std::vector<KinematicSample> out(trace.size());
    out[0] = {trace[0], 0.0, 0.0};
    for (size_t i = 1; i < trace.size(); ++i) {
        const double dx = trace[i].x - trace[i - 1].x;
        const double dy = trace[i].y - trace[i - 1].y;
        out[i].q = trace[i];
        out[i].speed = std::hypot(dx, dy) / dt;
        out[i].heading = std::atan2(dy, dx);
    }
    return out;
}

std::vector<Vec2> resample_uniform(std::span<const Vec2> pos,
                                   std::span<const double> t, double dt) {
    require(pos.size() == t.size() && pos.size() >= 2,
            "resample_uniform: bad inputs");
    require(dt > 0.0, "resample_uniform: dt must be positive");
    std::vector<Vec2> out;
    size_t seg = 0;
    for (double tt = t.front(); tt <= t.back() + 1e-9; tt += dt) {
        while (seg + 2 < t.size() && t[seg + 1] < tt) ++seg;
        const double span_t = t[seg + 1] - t[seg];
        const double w = span_t > 0.0 ? std::clamp((tt - t[seg]) / span_t, 0.0, 1.0)
                                      : 0.0;
        out.push_back({pos[seg].x + w * (pos[seg + 1].x - pos[seg].x),
                       pos[seg].y + w * (pos[seg + 1].y - pos[seg].y)});
    }
    return out;
}

PredictorModel::PredictorModel(const PredictorConfig& cfg, Rng& rng)
    : lstm1_("predictor.lstm1", 5, cfg.hidden),
      lstm2_("predictor.lstm2", cfg.hidden, cfg.hidden),
      head_("predictor.head", cfg.hidden, 2, nn::Activation::identity),
      history_(cfg.history),
      hidden_(cfg.hidden),
      dt_(cfg.dt) {
    require(cfg.history >= 2, "PredictorModel: history must be >= 2");
    lstm1_.init(rng);
    lstm2_.init(rng);
    head_.init(rng);
}

std::vector<nn::ParamTensor*> PredictorModel::params() {
    std::vector<nn::ParamTensor*> out;
    for (auto* p : lstm1_.params()) out.push_back(p);
    for (auto* p : lstm2_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
}

nn::Tape::Var PredictorModel::forward(nn::Tape& tape,
                                      std::span<const KinematicSample> window) {
    require(static_cast<int>(window.size()) >= history_,
            "predict: history shorter than window");
    const auto last = window.subspan(window.size() - history_);

    nn::Tensor zero(hidden_, 1);
    nn::LstmState s1{tape.constant(zero), tape.constant(zero)};
    nn::LstmState s2{tape.constant(zero), tape.constant(zero)};
    nn::Tape::Var h2 = 0;
    for (const KinematicSample& k : last) {
        nn::Tensor x(5, 1);
        const double raw[5] = {k.q.x, k.q.y, k.speed, std::cos(k.heading),
                               std::sin(k.heading)};
        for (int f = 0; f < 5; ++f)
            x.data[f] = (raw[f] - feature_mean[f]) / feature_scale[f];
        auto [h1, ns1] = lstm_step(tape, lstm1_, tape.constant(x), s1);
        s1 = ns1;
        auto [o2, ns2] = lstm_step(tape, lstm2_, h1, s2);
        s2 = ns2;
        h2 = o2;
    }
    return dense_apply(tape, head_, h2);
}

Vec2 PredictorModel::predict_next(std::span<const KinematicSample> window) {
    nn::Tape tape;
    nn::Tape::Var out = forward(tape, window);
    const nn::Tensor& v = tape.value(out);
    return {v.data[0] * feature_scale[0] + feature_mean[0],
            v.data[1] * feature_scale[1] + feature_mean[1]};
}

std::vector<Vec2> PredictorModel::predict_rollout(
    std::span<const KinematicSample> history, int horizon_steps) {
    require(horizon_steps > 0, "predict_rollout: horizon must be positive");
    require(static_cast<int>(history.size()) >= history_,
            "predict_rollout: history shorter than window");
    std::vector<KinematicSample> window(history.begin(), history.end());
    std::vector<Vec2> out;
    out.reserve(horizon_steps);
    for (int s = 0; s < horizon_steps; ++s) {
        const Vec2 next = predict_next(window);
        const Vec2 prev = window.back().q;
        KinematicSample k;
        k.q = next;
        k.speed = distance(next, prev) / dt_;
        k.heading = std::atan2(next.y - prev.y, next.x - prev.x);
        window.push_back(k);
        out.push_back(next);
    }
    return out;
}

void PredictorModel::save(const std::string& path) {
    nn::ParamTensor meta("predictor.meta", 3, 1);
    meta.value.data = {static_cast<double>(history_), static_cast<double>(hidden_),
                       dt_};
    nn::ParamTensor mean("predictor.feature_mean", 5, 1);
    nn::ParamTensor scale("predictor.feature_scale", 5, 1);
    for (int i = 0; i < 5; ++i) {
        mean.value.data[i] = feature_mean[i];
        scale.value.data[i] = feature_scale[i];
    }
    std::vector<nn::ParamTensor*> all = {&meta, &mean, &scale};
    for (auto* p : params()) all.push_back(p);
    nn::save_checkpoint(path, all);
}

PredictorModel PredictorModel::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("PredictorModel::load: cannot open " + path);
    // peek the meta record to size the network before loading everything
    nn::ParamTensor meta("predictor.meta", 3, 1);
    {
        std::string magic;
        std::getline(is, magic);
        size_t count;
        is >> count;
        std::string name;
        int r, c;
        is >> name >> r >> c;
        if (name != "predictor.meta")
            throw Error("PredictorModel::load: missing meta record");
        for (int i = 0; i < 3; ++i) is >> meta.value.data[i];
    }
    PredictorConfig cfg;
    cfg.history = static_cast<int>(meta.value.data[0]);
    cfg.hidden = static_cast<int>(meta.value.data[1]);
    cfg.dt = meta.value.data[2];
    Rng rng(0);
    PredictorModel model(cfg, rng);

    is.clear();
    is.seekg(0);
    nn::ParamTensor mean("predictor.feature_mean", 5, 1);
    nn::ParamTensor scale("predictor.feature_scale", 5, 1);
    std::vector<nn::ParamTensor*> all = {&meta, &mean, &scale};
    for (auto* p : model.params()) all.push_back(p);
    nn::load_checkpoint(is, all);
    for (int i = 0; i < 5; ++i) {
        model.feature_mean[i] = mean.value.data[i];
        model.feature_scale[i] = scale.value.data[i];
    }
    return model;
}

PredictorModel train_predictor(
    const std::vector<std::vector<KinematicSample>>& traces,
    const PredictorConfig& cfg, std::vector<double>* loss_curve) {
    require(!traces.empty(), "train_predictor: no traces");
    size_t shortest = SIZE_MAX;
    bool any = false;
    for (const auto& tr : traces) {
        shortest = std::min(shortest, tr.size());
        if (static_cast<int>(tr.size()) > cfg.history) any = true;
    }
    if (!any)
        throw Error("train_predictor: insufficient data; shortest trace has " +
                    std::to_string(shortest) + " samples, need > " +
                    std::to_string(cfg.history));

    struct Window {
        const KinematicSample* begin;
        Vec2 target;
    };
    std::vector<Window> windows;
    for (const auto& tr : traces) {
        if (static_cast<int>(tr.size()) <= cfg.history) continue;
        for (size_t s = 0; s + cfg.history < tr.size(); ++s)
            windows.push_back({tr.data() + s, tr[s + cfg.history].q});
    }

    Rng rng(cfg.seed);
    PredictorModel model(cfg, rng);

    // per-feature normalization from the training windows
    std::array<double, 5> mean{}, var{};
    size_t count = 0;
    for (const auto& w : windows) {
        for (int s = 0; s < cfg.history; ++s) {
            const KinematicSample& k = w.begin[s];
            const double f[5] = {k.q.x, k.q.y, k.speed, std::cos(k.heading),
                                 std::sin(k.heading)};
            for (int i = 0; i < 5; ++i) mean[i] += f[i];
            ++count;
        }
    }
    for (int i = 0; i < 5; ++i) mean[i] /= static_cast<double>(count);
    for (const auto& w : windows) {
        for (int s = 0; s < cfg.history; ++s) {
            const KinematicSample& k = w.begin[s];
            const double f[5] = {k.q.x, k.q.y, k.speed, std::cos(k.heading),
                                 std::sin(k.heading)};
            for (int i = 0; i < 5; ++i)
                var[i] += (f[i] - mean[i]) * (f[i] - mean[i]);
        }
    }
    for (int i = 0; i < 5; ++i) {
        model.feature_mean[i] = mean[i];
        model.feature_scale[i] =
            std::max(std::sqrt(var[i] / static_cast<double>(count)), 1e-8);
    }

    nn::AdamOptimizer opt(cfg.lr);
    auto mparams = model.params();
    std::vector<size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with our own rng for reproducibility
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);
        double epoch_loss = 0.0;
        size_t in_batch = 0;
        nn::AdamOptimizer::zero_grad(mparams);
        for (size_t idx : order) {
            const Window& w = windows[idx];
            nn::Tape tape;
            nn::Tape::Var pred =
                model.forward(tape, {w.begin, static_cast<size_t>(cfg.history)});
            nn::Tensor target(2, 1);
            target.data[0] =
                (w.target.x - model.feature_mean[0]) / model.feature_scale[0];
            target.data[1] =
                (w.target.y - model.feature_mean[1]) / model.feature_scale[1];
            nn::Tape::Var loss = tape.mse(pred, target);
            epoch_loss += tape.value(loss).data[0];
            tape.backward(loss);
            if (++in_batch == static_cast<size_t>(cfg.batch)) {
                opt.step(mparams);
                nn::AdamOptimizer::zero_grad(mparams);
                in_batch = 0;
            }
        }
        if (in_batch > 0) {
            opt.step(mparams);
            nn::AdamOptimizer::zero_grad(mparams);
        }
        if (loss_curve)
            loss_curve->push_back(epoch_loss / static_cast<double>(windows.size()));
    }
    return model;
}

}  // namespace risctl::traj
