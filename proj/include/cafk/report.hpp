#pragma once

// Evaluation report output: a JSON summary, a per-sample CSV and an SVG
// plot of reference vs predicted end-effector paths.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cafk/data.hpp"
#include "cafk/errors.hpp"
#include "cafk/experiments.hpp"

namespace cafk::report {

inline nlohmann::ordered_json to_json(const exp::EvalReport& r) {
    nlohmann::ordered_json j;
    j["format"] = "cafk-report";
    j["version"] = 1;
    j["protocol"] = r.protocol;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) {
        nlohmann::ordered_json x;
        x["config"] = e.config;
        x["rmse_mm"] = e.rmse_mm;
        x["samples"] = e.samples;
        if (e.seconds_per_trajectory > 0) x["seconds_per_trajectory"] = e.seconds_per_trajectory;
        entries.push_back(std::move(x));
    }
    j["entries"] = std::move(entries);
    return j;
}

inline void save_json(const exp::EvalReport& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report " + path.string());
    out << to_json(r).dump(2) << '\n';
}

/// trajectory, reference position, predicted position and Euclidean error.
inline void write_csv(const data::Dataset& ds, const std::vector<Pose>& predictions, std::ostream& out) {
    if (predictions.size() != ds.size()) throw ShapeMismatch("report: prediction count differs from dataset");
    out << "trajectory,ref_x,ref_y,ref_z,pred_x,pred_y,pred_z,error_mm\n";
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const auto& s = ds.samples[k];
        const auto& p = predictions[k];
        out << s.trajectory;
        for (double v : {s.pose.x, s.pose.y, s.pose.z, p.x, p.y, p.z,
                         (p.position() - s.pose.position()).norm()})
            out << ',' << data::format_number(v);
        out << '\n';
    }
}

inline void save_csv(const data::Dataset& ds, const std::vector<Pose>& predictions,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_csv(ds, predictions, out);
}

/// x-y projection of one trajectory: reference in black, prediction in red.
inline void write_svg(const data::Dataset& ds, const std::vector<Pose>& predictions, std::size_t trajectory,
                      std::ostream& out) {
    if (predictions.size() != ds.size()) throw ShapeMismatch("report: prediction count differs from dataset");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < ds.size(); ++k)
        if (ds.samples[k].trajectory == trajectory) idx.push_back(k);
    if (idx.empty()) throw EmptyInput("report: trajectory " + std::to_string(trajectory) + " has no samples");

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto k : idx)
        for (const Pose* p : {&ds.samples[k].pose, &predictions[k]}) {
            x0 = std::min(x0, p->x), x1 = std::max(x1, p->x);
            y0 = std::min(y0, p->y), y1 = std::max(y1, p->y);
        }
    const double span = std::max({x1 - x0, y1 - y0, 1.0});
    const double size = 400, pad = 20;
    auto sx = [&](double x) { return pad + (x - x0) / span * size; };
    auto sy = [&](double y) { return pad + size - (y - y0) / span * size; };
    auto path = [&](auto get, const char* colour) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        char buf[64];
        for (auto k : idx) {
            const Pose& p = get(k);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(p.x), sy(p.y));
            out << buf;
        }
        out << "\"/>\n";
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad << "\" height=\""
        << size + 2 * pad << "\">\n";
    path([&](std::size_t k) -> const Pose& { return ds.samples[k].pose; }, "black");
    path([&](std::size_t k) -> const Pose& { return predictions[k]; }, "red");
    out << "</svg>\n";
}

inline void save_svg(const data::Dataset& ds, const std::vector<Pose>& predictions, std::size_t trajectory,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_svg(ds, predictions, trajectory, out);
}

}  // namespace cafk::report
