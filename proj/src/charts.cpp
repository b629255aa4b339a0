#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "risctl/experiments/runner.hpp"

namespace risctl::experiments {

namespace fs = std::filesystem;

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw Error("chart: CSV is missing column '" + name + "'");
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("chart: missing CSV " + path);
    CsvTable t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        if (t.header.empty())
            t.header = fields;
        else
            t.rows.push_back(fields);
    }
    if (t.header.empty()) throw Error("chart: empty CSV " + path);
    return t;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
};

void line_chart(const std::string& path, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                const std::vector<Series>& series) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series)
        for (auto [x, y] : s.pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double y) {
        return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
    };

    std::ofstream os(path);
    if (!os) throw Error("chart: cannot write " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-size=\"15\">" << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
       << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
       << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv)
           << "</text>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv)
           << "</text>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\""
           << W - mr << "\" y2=\"" << py(yv)
           << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
    os << "<text x=\"" << (W + ml - mr) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << (H + mt - mb) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
          "18 " << (H + mt - mb) / 2 << ")\">" << ylabel << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kColors[si % 8];
        std::ostringstream poly;
        for (auto [x, y] : series[si].pts)
            poly << px(x) << ',' << py(y) << ' ';
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.8\" points=\"" << poly.str() << "\"/>\n";
        for (auto [x, y] : series[si].pts)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
               << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
        os << "<rect x=\"" << W - mr - 150 << "\" y=\"" << mt + 18 * si
           << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << W - mr - 132 << "\" y=\"" << mt + 18 * si + 6
           << "\" font-size=\"11\">" << series[si].name << "</text>\n";
    }
    os << "</svg>\n";
}

void heatmap(const std::string& path, const std::string& title,
             const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels,
             const std::vector<std::vector<double>>& values) {
    const size_t nr = row_labels.size(), nc = col_labels.size();
    require(values.size() == nr, "heatmap: row count mismatch");
    const double cell = 64, ml = 110, mt = 70;
    const double W = ml + nc * cell + 30, H = mt + nr * cell + 40;
    double vmin = 1e300, vmax = -1e300;
    for (const auto& row : values)
        for (double v : row) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    if (vmax == vmin) vmax = vmin + 1;

    std::ofstream os(path);
    if (!os) throw Error("chart: cannot write " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-size=\"15\">" << title << "</text>\n";
    for (size_t r = 0; r < nr; ++r) {
        os << "<text x=\"" << ml - 10 << "\" y=\"" << mt + r * cell + cell / 2 + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << row_labels[r]
           << "</text>\n";
        require(values[r].size() == nc, "heatmap: column count mismatch");
        for (size_t c = 0; c < nc; ++c) {
            const double t = (values[r][c] - vmin) / (vmax - vmin);
            const int red = static_cast<int>(40 + 200 * t);
            const int blue = static_cast<int>(240 - 200 * t);
            os << "<rect x=\"" << ml + c * cell << "\" y=\"" << mt + r * cell
               << "\" width=\"" << cell << "\" height=\"" << cell
               << "\" fill=\"rgb(" << red << ",90," << blue
               << ")\" stroke=\"white\"/>\n";
            os << "<text x=\"" << ml + c * cell + cell / 2 << "\" y=\""
               << mt + r * cell + cell / 2 + 4
               << "\" text-anchor=\"middle\" font-size=\"12\" "
                  "fill=\"white\">" << fmt(values[r][c]) << "</text>\n";
        }
    }
    for (size_t c = 0; c < nc; ++c)
        os << "<text x=\"" << ml + c * cell + cell / 2 << "\" y=\"" << mt - 12
           << "\" text-anchor=\"middle\" font-size=\"12\">" << col_labels[c]
           << "</text>\n";
    os << "</svg>\n";
}

}  // namespace

void emit_outputs(const std::string& run_dir) {
    bool rendered = false;

    if (fs::exists(run_dir + "/reward_curve.csv")) {
        const CsvTable t = read_csv(run_dir + "/reward_curve.csv");
        Series s;
        s.name = "mean reward";
        const int cs = t.col("step"), cr = t.col("mean_reward");
        for (const auto& row : t.rows)
            s.pts.emplace_back(std::stod(row[cs]), std::stod(row[cr]));
        line_chart(run_dir + "/reward_curve.svg", "Training reward", "step",
                   "achievable rate (bit/s/Hz)", {s});
        rendered = true;
    }

    for (const auto& [file, xlabel] :
         std::vector<std::pair<std::string, std::string>>{
             {"sweep_power", "transmit power (W)"},
             {"sweep_elements", "elements per RIS"}}) {
        const std::string csv = run_dir + "/" + file + ".csv";
        if (!fs::exists(csv)) continue;
        const CsvTable t = read_csv(csv);
        const int ca = 0, cm = t.col("num_interferers"),
                  cp = t.col("policy"), cv = t.col("mean");
        // one series per (policy, interferer count)
        std::map<std::string, Series> series;
        for (const auto& row : t.rows) {
            const std::string key = row[cp] + " (m=" + row[cm] + ")";
            Series& s = series[key];
            s.name = key;
            s.pts.emplace_back(std::stod(row[ca]), std::stod(row[cv]));
        }
        std::vector<Series> ordered;
        for (auto& [k, s] : series) {
            std::sort(s.pts.begin(), s.pts.end());
            ordered.push_back(std::move(s));
        }
        line_chart(run_dir + "/" + file + ".svg", file, xlabel,
                   file == "sweep_power" ? "achievable rate (bit/s/Hz)"
                                         : "SINR",
                   ordered);
        rendered = true;
    }

    if (fs::exists(run_dir + "/arr_matrix.csv")) {
        const CsvTable t = read_csv(run_dir + "/arr_matrix.csv");
        const int ci = t.col("m_train"), cj = t.col("m_test"),
                  cv = t.col("arr");
        std::vector<int> counts;
        for (const auto& row : t.rows) {
            const int v = std::stoi(row[ci]);
            if (std::find(counts.begin(), counts.end(), v) == counts.end())
                counts.push_back(v);
        }
        std::sort(counts.begin(), counts.end());
        std::vector<std::string> labels;
        for (int c : counts) labels.push_back("m=" + std::to_string(c));
        std::vector<std::vector<double>> vals(
            counts.size(), std::vector<double>(counts.size(), 0.0));
        for (const auto& row : t.rows) {
            const auto it = std::find(counts.begin(), counts.end(),
                                      std::stoi(row[ci]));
            const auto jt = std::find(counts.begin(), counts.end(),
                                      std::stoi(row[cj]));
            vals[it - counts.begin()][jt - counts.begin()] =
                std::stod(row[cv]);
        }
        heatmap(run_dir + "/arr_heatmap.svg",
                "Achievable rate ratio (train row, test column)", labels,
                labels, vals);
        rendered = true;
    }

    if (fs::exists(run_dir + "/predictor_loss.csv")) {
        const CsvTable t = read_csv(run_dir + "/predictor_loss.csv");
        Series s;
        s.name = "train MSE";
        const int ce = t.col("epoch"), cl = t.col("mse");
        for (const auto& row : t.rows)
            s.pts.emplace_back(std::stod(row[ce]), std::stod(row[cl]));
        line_chart(run_dir + "/predictor_loss.svg", "Predictor training loss",
                   "epoch", "MSE (normalized)", {s});
        rendered = true;
    }

    if (!rendered)
        throw Error("emit_outputs: no renderable CSVs found in " + run_dir);
}

}  // namespace risctl::experiments
