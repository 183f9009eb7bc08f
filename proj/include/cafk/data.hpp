#pragma once

// Trajectory generation, IK labeling, noise injection, splits and the
// line-oriented dataset file format.
//
// Dataset file (version 1):
//
//   # cafk-dataset
//   version=1
//   config=simc6
//   cables=6
//   provenance=simulated            (simulated | noise-injected | external)
//   sigma=0                         (mm, noise std for noise-injected data)
//   seed=42
//   samples=2000
//   columns=trajectory,x,y,z,roll,pitch,yaw,l1,...,l6
//   0,512.25,...
//
// Numbers are written in the shortest fixed-point form that parses back to
// the same double, so save -> load is exact.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cafk/core.hpp"
#include "cafk/graph.hpp"

namespace cafk::data {

inline constexpr int kDatasetVersion = 1;

struct Trajectory {
    std::string config_name;
    std::vector<Pose> poses;
};

enum class ProvenanceKind { Simulated, NoiseInjected, External };

struct Provenance {
    ProvenanceKind kind = ProvenanceKind::Simulated;
    double sigma = 0;  // mm, NoiseInjected only

    std::string name() const {
        switch (kind) {
            case ProvenanceKind::Simulated: return "simulated";
            case ProvenanceKind::NoiseInjected: return "noise-injected";
            case ProvenanceKind::External: return "external";
        }
        return "?";
    }
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Sample {
    CableLengths lengths;
    Pose pose;
    std::size_t trajectory = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
    std::string config_name;
    std::size_t cable_count = 0;
    Provenance provenance;
    std::uint64_t seed = 0;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    /// Cable lengths as an m x N matrix, one sample per column.
    Eigen::MatrixXd lengths_matrix() const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(cable_count), static_cast<Eigen::Index>(samples.size()));
        for (std::size_t k = 0; k < samples.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = samples[k].lengths.values();
        return out;
    }

    std::vector<Pose> poses() const {
        std::vector<Pose> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.pose);
        return out;
    }

    void validate() const {
        for (std::size_t k = 0; k < samples.size(); ++k)
            if (samples[k].lengths.size() != cable_count)
                throw ConfigMismatch("dataset '" + config_name + "': sample " + std::to_string(k) + " has " +
                                     std::to_string(samples[k].lengths.size()) + " lengths, expected " +
                                     std::to_string(cable_count));
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline void check_matches(const CdprConfig& config, const Dataset& ds) {
    if (ds.config_name != config.name || ds.cable_count != config.cable_count())
        throw ConfigMismatch("dataset for '" + ds.config_name + "' (" + std::to_string(ds.cable_count) +
                             " cables) used with config '" + config.name + "' (" +
                             std::to_string(config.cable_count()) + " cables)");
}

// ---------------------------------------------------------------------------
// generation

namespace detail {
inline std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

inline Vec6 random_pose_vector(const CdprConfig& config, std::mt19937_64& rng) {
    Vec6 q;
    for (int k = 0; k < 6; ++k) {
        if (config.pose_lower[k] == config.pose_upper[k]) {
            q[k] = config.pose_lower[k];
        } else {
            std::uniform_real_distribution<double> u(config.pose_lower[k], config.pose_upper[k]);
            q[k] = u(rng);
        }
    }
    return q;
}
}  // namespace detail

/// Uniform random pose inside the config bounds.
inline Pose random_pose(const CdprConfig& config, std::mt19937_64& rng) {
    return Pose::from_vector(detail::random_pose_vector(config, rng));
}

/// Samples the Bezier polynomial with the given control points at `samples`
/// uniform parameters t in [0, 1], clamping every pose to the config bounds.
/// Degree = controls.size() - 1.
inline Trajectory polynomial_trajectory(const CdprConfig& config, const std::vector<Vec6>& controls,
                                        std::size_t samples) {
    if (controls.empty()) throw ValidationError("trajectory: need at least one control point");
    if (samples < 2) throw ValidationError("trajectory: samples_per_traj must be >= 2");
    Trajectory traj;
    traj.config_name = config.name;
    traj.poses.reserve(samples);
    const std::size_t n = controls.size() - 1;
    for (std::size_t s = 0; s < samples; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(samples - 1);
        // de Casteljau
        std::vector<Vec6> pts = controls;
        for (std::size_t r = 1; r <= n; ++r)
            for (std::size_t i = 0; i + r <= n; ++i) pts[i] = (1 - t) * pts[i] + t * pts[i + 1];
        traj.poses.push_back(config.clamp(Pose::from_vector(pts[0])));
    }
    return traj;
}

/// Random cubic trajectory: endpoints and both interior control points drawn
/// uniformly inside the bounds.
inline Trajectory gen_trajectory(const CdprConfig& config, std::uint64_t seed, std::size_t samples_per_traj = 100) {
    config.validate();
    auto rng = detail::seeded(seed, 0);
    std::vector<Vec6> controls;
    for (int k = 0; k < 4; ++k) controls.push_back(detail::random_pose_vector(config, rng));
    return polynomial_trajectory(config, controls, samples_per_traj);
}

/// IK-labels every pose of `traj`, appending to `ds`.
inline void append_trajectory(const CdprConfig& config, const Trajectory& traj, std::size_t traj_index, Dataset& ds) {
    for (const auto& pose : traj.poses) ds.samples.push_back({inverse_kinematics(config, pose), pose, traj_index});
}

inline Dataset gen_dataset(const CdprConfig& config, std::size_t n_traj = 100, std::size_t samples_per_traj = 100,
                           std::uint64_t seed = 0) {
    if (n_traj < 1) throw ValidationError("gen_dataset: n_traj must be >= 1");
    config.validate();
    Dataset ds;
    ds.config_name = config.name;
    ds.cable_count = config.cable_count();
    ds.provenance = {ProvenanceKind::Simulated, 0};
    ds.seed = seed;
    ds.samples.reserve(n_traj * samples_per_traj);
    for (std::size_t k = 0; k < n_traj; ++k) {
        // independent stream per trajectory
        const std::uint64_t traj_seed = detail::seeded(seed, k + 1)();
        append_trajectory(config, gen_trajectory(config, traj_seed, samples_per_traj), k, ds);
    }
    return ds;
}

/// Copy of `config` with every anchor and offset coordinate shifted by N(0, sigma^2).
inline CdprConfig perturb_geometry(const CdprConfig& config, double sigma, std::mt19937_64& rng) {
    CdprConfig out = config;
    if (sigma == 0) return out;
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < config.cable_count(); ++i) {
        for (int k = 0; k < 3; ++k) out.frame_anchors[i][k] += noise(rng);
        for (int k = 0; k < 3; ++k) out.ee_offsets[i][k] += noise(rng);
    }
    return out;
}

/// Relabels the cable lengths of every sample with IK evaluated on a freshly
/// perturbed geometry (independent draw per sample). Poses are left untouched.
inline Dataset inject_noise(const CdprConfig& config, const Dataset& ds, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw ValidationError("inject_noise: sigma must be >= 0");
    check_matches(config, ds);
    Dataset out = ds;
    out.provenance = {ProvenanceKind::NoiseInjected, sigma};
    out.seed = seed;
    if (sigma == 0) return out;
    for (std::size_t k = 0; k < out.samples.size(); ++k) {
        auto rng = detail::seeded(seed, k);
        out.samples[k].lengths = inverse_kinematics(perturb_geometry(config, sigma, rng), out.samples[k].pose);
    }
    return out;
}

/// Random sample-level partition into (train, test). Both parts keep the
/// original sample order.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction = 0.8, std::uint64_t seed = 0) {
    if (!(train_fraction > 0 && train_fraction < 1)) throw ValidationError("split: train_fraction must be in (0, 1)");
    std::vector<std::size_t> idx(ds.samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> te(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());
    auto take = [&](const std::vector<std::size_t>& sel) {
        Dataset d = ds;
        d.samples.clear();
        for (std::size_t i : sel) d.samples.push_back(ds.samples[i]);
        return d;
    };
    return {take(tr), take(te)};
}

/// Concatenation of datasets of the same configuration.
inline Dataset concat(const Dataset& a, const Dataset& b) {
    if (a.config_name != b.config_name || a.cable_count != b.cable_count)
        throw ConfigMismatch("concat: datasets belong to different configs");
    Dataset out = a;
    std::size_t offset = 0;
    for (const auto& s : a.samples) offset = std::max(offset, s.trajectory + 1);
    for (auto s : b.samples) {
        s.trajectory += offset;
        out.samples.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// file format

inline std::string format_number(double v) {
    char buf[512];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    if (res.ec != std::errc()) throw IoError("format_number: value does not fit");
    return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_number(std::string_view s, std::size_t line) {
    double v = 0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw SchemaError("dataset line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(',', start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

inline std::string columns_line(std::size_t m) {
    std::string c = "trajectory,x,y,z,roll,pitch,yaw";
    for (std::size_t i = 1; i <= m; ++i) c += ",l" + std::to_string(i);
    return c;
}

}  // namespace detail

inline void write_dataset(const Dataset& ds, std::ostream& out) {
    ds.validate();
    out << "# cafk-dataset\n";
    out << "version=" << kDatasetVersion << '\n';
    out << "config=" << ds.config_name << '\n';
    out << "cables=" << ds.cable_count << '\n';
    out << "provenance=" << ds.provenance.name() << '\n';
    out << "sigma=" << format_number(ds.provenance.sigma) << '\n';
    out << "seed=" << ds.seed << '\n';
    out << "samples=" << ds.samples.size() << '\n';
    out << "columns=" << detail::columns_line(ds.cable_count) << '\n';
    std::string line;
    for (const auto& s : ds.samples) {
        line = std::to_string(s.trajectory);
        for (double v : {s.pose.x, s.pose.y, s.pose.z, s.pose.roll, s.pose.pitch, s.pose.yaw})
            line += ',' + format_number(v);
        for (std::size_t i = 0; i < s.lengths.size(); ++i) line += ',' + format_number(s.lengths[i]);
        out << line << '\n';
    }
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset " + path.string());
    write_dataset(ds, out);
    if (!out) throw IoError("failed writing dataset " + path.string());
}

inline Dataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next() || line != "# cafk-dataset") throw SchemaError("dataset: missing '# cafk-dataset' header");

    std::map<std::string, std::string> header;
    const char* keys[] = {"version", "config", "cables", "provenance", "sigma", "seed", "samples", "columns"};
    for (const char* key : keys) {
        if (!next()) throw SchemaError("dataset: truncated header");
        const auto eq = line.find('=');
        if (eq == std::string::npos || line.substr(0, eq) != key)
            throw SchemaError("dataset line " + std::to_string(lineno) + ": expected '" + key + "='");
        header[key] = line.substr(eq + 1);
    }
    auto to_size = [&](const std::string& key) {
        const std::string& v = header[key];
        std::uint64_t out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw SchemaError("dataset: header '" + key + "' is not a non-negative integer");
        return out;
    };
    if (to_size("version") != kDatasetVersion) throw SchemaError("dataset: unsupported version " + header["version"]);

    Dataset ds;
    ds.config_name = header["config"];
    if (ds.config_name.empty()) throw SchemaError("dataset: empty config name");
    ds.cable_count = static_cast<std::size_t>(to_size("cables"));
    if (ds.cable_count < 1) throw SchemaError("dataset: cables must be positive");
    ds.seed = to_size("seed");
    const std::string& prov = header["provenance"];
    if (prov == "simulated")
        ds.provenance.kind = ProvenanceKind::Simulated;
    else if (prov == "noise-injected")
        ds.provenance.kind = ProvenanceKind::NoiseInjected;
    else if (prov == "external")
        ds.provenance.kind = ProvenanceKind::External;
    else
        throw SchemaError("dataset: unknown provenance '" + prov + "'");
    ds.provenance.sigma = detail::parse_number(header["sigma"], 6);
    if (header["columns"] != detail::columns_line(ds.cable_count))
        throw SchemaError("dataset: columns do not match cable count");
    const auto n = to_size("samples");

    ds.samples.reserve(static_cast<std::size_t>(n));
    while (next()) {
        if (line.empty()) continue;
        const auto fields = detail::split_commas(line);
        if (fields.size() != 7 + ds.cable_count)
            throw SchemaError("dataset line " + std::to_string(lineno) + ": expected " +
                              std::to_string(7 + ds.cable_count) + " fields, got " + std::to_string(fields.size()));
        Sample s;
        std::uint64_t traj = 0;
        auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), traj);
        if (res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size())
            throw SchemaError("dataset line " + std::to_string(lineno) + ": bad trajectory index");
        s.trajectory = static_cast<std::size_t>(traj);
        double q[6];
        for (int k = 0; k < 6; ++k) q[k] = detail::parse_number(fields[static_cast<std::size_t>(1 + k)], lineno);
        s.pose = {q[0], q[1], q[2], q[3], q[4], q[5]};
        Eigen::VectorXd l(static_cast<Eigen::Index>(ds.cable_count));
        for (std::size_t i = 0; i < ds.cable_count; ++i) l[static_cast<Eigen::Index>(i)] = detail::parse_number(fields[7 + i], lineno);
        try {
            s.lengths = CableLengths(std::move(l));
        } catch (const ValidationError& e) {
            throw SchemaError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != n)
        throw SchemaError("dataset: header announces " + std::to_string(n) + " samples, file has " +
                          std::to_string(ds.samples.size()));
    return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset " + path.string());
    try {
        return read_dataset(in);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

/// Loads externally measured data (same schema) and checks it against `config`.
inline Dataset load_external(const std::filesystem::path& path, const CdprConfig& config) {
    Dataset ds = load_dataset(path);
    check_matches(config, ds);
    ds.provenance = {ProvenanceKind::External, 0};
    return ds;
}

// ---------------------------------------------------------------------------
// graph dumps (same line-oriented conventions, for debugging)

inline void write_graph_dump(const CdprGraph& g, std::ostream& out) {
    out << "# cafk-graph\n";
    out << "version=" << kDatasetVersion << '\n';
    out << "config=" << g.config_name << '\n';
    out << "cables=" << g.cable_count() << '\n';
    out << "nodes=" << g.node_count() << '\n';
    out << "edges=" << g.edge_count() << '\n';
    out << "world=" << format_number(g.world_feature.x()) << ',' << format_number(g.world_feature.y()) << ','
        << format_number(g.world_feature.z()) << '\n';
    out << "body=";
    for (int k = 0; k < 6; ++k) out << (k ? "," : "") << format_number(g.body_feature[k]);
    out << '\n';
    out << "columns=slot,cable,length,ax,ay,az,vx,vy,vz\n";
    for (std::size_t i = 0; i < g.cable_count(); ++i) {
        out << i << ',' << g.cable_order[i] << ',' << format_number(g.cable_features[i]);
        for (int k = 0; k < 3; ++k) out << ',' << format_number(g.edge_wc_features[i][k]);
        for (int k = 0; k < 3; ++k) out << ',' << format_number(g.edge_cb_features[i][k]);
        out << '\n';
    }
}

}  // namespace cafk::data
