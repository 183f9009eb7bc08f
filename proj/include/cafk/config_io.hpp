#pragma once

// Bundled robot configurations and the JSON config file format.
//
// File format (version 1):
//
//   {
//     "format": "cafk-config",
//     "version": 1,
//     "name": "simc8",
//     "cable_count": 8,
//     "planar": false,
//     "frame_anchors": [[x, y, z], ...],     // mm, world frame
//     "ee_offsets":    [[x, y, z], ...],     // mm, end-effector frame
//     "pose_lower": [x, y, z, roll, pitch, yaw],
//     "pose_upper": [x, y, z, roll, pitch, yaw]
//   }
//
// Every field is required; unknown fields are rejected.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cafk/core.hpp"

namespace cafk {

inline constexpr int kConfigFormatVersion = 1;

namespace detail {

inline Vec6 spatial_lower() {
    Vec6 v;
    v << 100, 100, 100, -0.26, -0.26, 0;
    return v;
}
inline Vec6 spatial_upper() {
    Vec6 v;
    v << 900, 900, 900, 0.26, 0.26, 0;
    return v;
}

// 1000 mm cube frame, 100 x 100 x 50 mm end-effector box.
inline Vec3 top_corner(int k) {
    static const double xy[4][2] = {{0, 0}, {1000, 0}, {1000, 1000}, {0, 1000}};
    return {xy[k][0], xy[k][1], 1000};
}
inline Vec3 bottom_corner(int k) { return top_corner(k) - Vec3(0, 0, 1000); }
inline Vec3 top_vertex(int k) {
    static const double xy[4][2] = {{-50, -50}, {50, -50}, {50, 50}, {-50, 50}};
    return {xy[k][0], xy[k][1], 25};
}
inline Vec3 bottom_vertex(int k) { return top_vertex(k) - Vec3(0, 0, 50); }

inline CdprConfig spatial(std::string name) {
    CdprConfig c;
    c.name = std::move(name);
    c.pose_lower = spatial_lower();
    c.pose_upper = spatial_upper();
    return c;
}

inline void add(CdprConfig& c, const Vec3& anchor, const Vec3& offset) {
    c.frame_anchors.push_back(anchor);
    c.ee_offsets.push_back(offset);
}

}  // namespace detail

/// Names of the bundled configurations, spatial ones first.
inline const std::vector<std::string>& bundled_config_names() {
    static const std::vector<std::string> names = {"simc4", "simc5", "simc6", "simc7",
                                                   "simc8", "simc9", "simc10", "expc4"};
    return names;
}

inline const std::vector<std::string>& spatial_config_names() {
    static const std::vector<std::string> names = {"simc4", "simc5", "simc6", "simc7",
                                                   "simc8", "simc9", "simc10"};
    return names;
}

/// Returns one of the bundled configurations by name.
inline CdprConfig bundled_config(const std::string& name) {
    using namespace detail;
    CdprConfig c;
    if (name == "simc4") {
        // Suspended robot: all cables leave from the top corners.
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
    } else if (name == "simc5") {
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
        add(c, {500, 500, 0}, {0, 0, -25});
    } else if (name == "simc6") {
        c = spatial(name);
        add(c, {0, 0, 1000}, {-50, -50, 25});
        add(c, {1000, 0, 1000}, {50, -50, 25});
        add(c, {500, 1000, 1000}, {0, 50, 25});
        add(c, {0, 1000, 0}, {-50, 50, -25});
        add(c, {1000, 1000, 0}, {50, 50, -25});
        add(c, {500, 0, 0}, {0, -50, -25});
    } else if (name == "simc7") {
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
        add(c, {500, 0, 0}, {0, -50, -25});
        add(c, {1000, 1000, 0}, {50, 50, -25});
        add(c, {0, 1000, 0}, {-50, 50, -25});
    } else if (name == "simc8") {
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
        for (int k = 0; k < 4; ++k) add(c, bottom_corner(k), bottom_vertex(k));
    } else if (name == "simc9") {
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
        for (int k = 0; k < 4; ++k) add(c, bottom_corner(k), bottom_vertex(k));
        add(c, {500, 500, 1000}, {0, 0, 25});
    } else if (name == "simc10") {
        c = spatial(name);
        for (int k = 0; k < 4; ++k) add(c, top_corner(k), top_vertex(k));
        for (int k = 0; k < 4; ++k) add(c, bottom_corner(k), bottom_vertex(k));
        add(c, {500, 500, 1000}, {0, 0, 25});
        add(c, {500, 500, 0}, {0, 0, -25});
    } else if (name == "expc4") {
        // Planar 4-cable robot in the z = 0 plane, pose (x, y, yaw).
        c.name = name;
        c.planar = true;
        c.pose_lower << 100, 100, 0, 0, 0, -0.26;
        c.pose_upper << 900, 900, 0, 0, 0, 0.26;
        // Rectangular end-effector; a square one would be similar to the
        // frame and make the robot architecturally singular.
        static const double xy[4][2] = {{-60, -30}, {60, -30}, {60, 30}, {-60, 30}};
        for (int k = 0; k < 4; ++k) add(c, bottom_corner(k), {xy[k][0], xy[k][1], 0});
    } else {
        throw ValidationError("unknown bundled config '" + name + "'");
    }
    c.validate();
    return c;
}

inline std::vector<CdprConfig> bundled_configs() {
    std::vector<CdprConfig> out;
    for (const auto& n : bundled_config_names()) out.push_back(bundled_config(n));
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json config_to_json(const CdprConfig& c) {
    auto points = [](const std::vector<Vec3>& pts) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& p : pts) arr.push_back({p.x(), p.y(), p.z()});
        return arr;
    };
    auto vec6 = [](const Vec6& v) { return std::vector<double>(v.data(), v.data() + 6); };
    nlohmann::ordered_json j;
    j["format"] = "cafk-config";
    j["version"] = kConfigFormatVersion;
    j["name"] = c.name;
    j["cable_count"] = c.cable_count();
    j["planar"] = c.planar;
    j["frame_anchors"] = points(c.frame_anchors);
    j["ee_offsets"] = points(c.ee_offsets);
    j["pose_lower"] = vec6(c.pose_lower);
    j["pose_upper"] = vec6(c.pose_upper);
    return j;
}

inline CdprConfig config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> fields = {"format",     "version",       "name",
                                                 "cable_count", "planar",       "frame_anchors",
                                                 "ee_offsets", "pose_lower",    "pose_upper"};
    if (!j.is_object()) throw SchemaError("config: top level must be an object");
    for (const auto& [key, _] : j.items())
        if (!fields.count(key)) throw SchemaError("config: unknown field '" + key + "'");
    for (const auto& f : fields)
        if (!j.contains(f)) throw SchemaError("config: missing field '" + f + "'");
    if (j["format"] != "cafk-config") throw SchemaError("config: format must be 'cafk-config'");
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kConfigFormatVersion)
        throw SchemaError("config: unsupported version");
    if (!j["name"].is_string()) throw SchemaError("config: name must be a string");
    if (!j["planar"].is_boolean()) throw SchemaError("config: planar must be a boolean");
    if (!j["cable_count"].is_number_unsigned()) throw SchemaError("config: cable_count must be a non-negative integer");

    auto number = [](const nlohmann::json& v, const std::string& what) {
        if (!v.is_number()) throw SchemaError("config: " + what + " must contain numbers");
        return v.get<double>();
    };
    auto points = [&](const char* key) {
        const auto& arr = j[key];
        if (!arr.is_array()) throw SchemaError(std::string("config: ") + key + " must be an array");
        std::vector<Vec3> out;
        for (const auto& p : arr) {
            if (!p.is_array() || p.size() != 3)
                throw SchemaError(std::string("config: ") + key + " entries must be 3-vectors");
            out.emplace_back(number(p[0], key), number(p[1], key), number(p[2], key));
        }
        return out;
    };
    auto vec6 = [&](const char* key) {
        const auto& arr = j[key];
        if (!arr.is_array() || arr.size() != 6)
            throw SchemaError(std::string("config: ") + key + " must be a 6-vector");
        Vec6 v;
        for (int k = 0; k < 6; ++k) v[k] = number(arr[static_cast<std::size_t>(k)], key);
        return v;
    };

    CdprConfig c;
    c.name = j["name"].get<std::string>();
    c.planar = j["planar"].get<bool>();
    c.frame_anchors = points("frame_anchors");
    c.ee_offsets = points("ee_offsets");
    c.pose_lower = vec6("pose_lower");
    c.pose_upper = vec6("pose_upper");
    if (j["cable_count"].get<std::size_t>() != c.frame_anchors.size())
        throw SchemaError("config: cable_count does not match frame_anchors");
    c.validate();
    return c;
}

inline CdprConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

inline void save_config_file(const CdprConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

/// Accepts either a bundled config name or a path to a config file.
inline CdprConfig resolve_config(const std::string& name_or_path) {
    for (const auto& n : bundled_config_names())
        if (n == name_or_path) return bundled_config(n);
    if (std::filesystem::exists(name_or_path)) return load_config_file(name_or_path);
    throw IoError("'" + name_or_path + "' is neither a bundled config nor an existing file");
}

}  // namespace cafk
