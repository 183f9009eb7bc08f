#pragma once

// Geometric model of a cable-driven parallel robot and its exact inverse
// kinematics. Units are millimetres and radians throughout the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cafk/errors.hpp"

namespace cafk {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// End-effector pose: position (mm) and roll/pitch/yaw (rad).
struct Pose {
    double x = 0, y = 0, z = 0;
    double roll = 0, pitch = 0, yaw = 0;

    static Pose from_vector(const Vec6& q) { return {q[0], q[1], q[2], q[3], q[4], q[5]}; }
    Vec6 to_vector() const {
        Vec6 q;
        q << x, y, z, roll, pitch, yaw;
        return q;
    }
    Vec3 position() const { return {x, y, z}; }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(roll) &&
               std::isfinite(pitch) && std::isfinite(yaw);
    }

    /// Throws ValidationError unless finite with angles in [-pi, pi].
    void validate() const {
        if (!finite()) throw ValidationError("pose: non-finite component");
        for (double a : {roll, pitch, yaw})
            if (a < -kPi || a > kPi) throw ValidationError("pose: Euler angle outside [-pi, pi]");
    }

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Cable lengths in mm, one per cable. All entries are non-negative.
class CableLengths {
public:
    CableLengths() = default;
    explicit CableLengths(Eigen::VectorXd values) : values_(std::move(values)) {
        for (Eigen::Index i = 0; i < values_.size(); ++i)
            if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
                throw ValidationError("cable lengths: entry " + std::to_string(i) +
                                      " is negative or non-finite");
    }
    CableLengths(std::initializer_list<double> values)
        : CableLengths(Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                         static_cast<Eigen::Index>(values.size()))) {}

    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    const Eigen::VectorXd& values() const { return values_; }

    friend bool operator==(const CableLengths& a, const CableLengths& b) {
        return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
    }

private:
    Eigen::VectorXd values_;
};

/// Full geometric description of one robot.
///
/// `frame_anchors[i]` is the exit point A_i of cable i on the frame (world frame),
/// `ee_offsets[i]` the attachment point v_i on the end-effector (body frame).
struct CdprConfig {
    std::string name;
    std::vector<Vec3> frame_anchors;
    std::vector<Vec3> ee_offsets;
    bool planar = false;
    Vec6 pose_lower = Vec6::Zero();
    Vec6 pose_upper = Vec6::Zero();

    std::size_t cable_count() const { return frame_anchors.size(); }

    void validate() const {
        if (name.empty()) throw ValidationError("config: empty name");
        if (frame_anchors.size() < 3)
            throw ValidationError("config '" + name + "': cable count must be >= 3");
        if (ee_offsets.size() != frame_anchors.size())
            throw ValidationError("config '" + name + "': frame_anchors and ee_offsets differ in length");
        for (const auto* pts : {&frame_anchors, &ee_offsets})
            for (const auto& p : *pts)
                if (!p.allFinite()) throw ValidationError("config '" + name + "': non-finite point");
        if (!pose_lower.allFinite() || !pose_upper.allFinite())
            throw ValidationError("config '" + name + "': non-finite pose bounds");
        for (int k = 0; k < 6; ++k)
            if (pose_lower[k] > pose_upper[k])
                throw ValidationError("config '" + name + "': pose_lower > pose_upper at index " +
                                      std::to_string(k));
        if (planar) {
            for (const auto* pts : {&frame_anchors, &ee_offsets})
                for (const auto& p : *pts)
                    if (p.z() != 0.0)
                        throw ValidationError("config '" + name + "': planar config with non-zero z");
            for (int k : {2, 3, 4})
                if (pose_lower[k] != 0.0 || pose_upper[k] != 0.0)
                    throw ValidationError("config '" + name +
                                          "': planar config must pin z, roll and pitch to 0");
        }
    }

    bool contains(const Pose& pose, double slack = 0.0) const {
        const Vec6 q = pose.to_vector();
        return ((q - pose_lower).array() >= -slack).all() && ((pose_upper - q).array() >= -slack).all();
    }

    Pose clamp(const Pose& pose) const {
        return Pose::from_vector(pose.to_vector().cwiseMax(pose_lower).cwiseMin(pose_upper));
    }

    /// Euclidean length of the positional part of the pose box (mm).
    double workspace_diagonal() const { return (pose_upper.head<3>() - pose_lower.head<3>()).norm(); }
};

// R = Rz(yaw) * Ry(pitch) * Rx(roll)
inline Mat3 rotation_matrix(double roll, double pitch, double yaw) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Mat3 r;
    r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr;
    return r;
}

inline Mat3 rotation_matrix(const Pose& pose) { return rotation_matrix(pose.roll, pose.pitch, pose.yaw); }

namespace detail {
inline void check_cable_index(const CdprConfig& config, std::size_t i) {
    if (i >= config.cable_count())
        throw IndexOutOfRange("cable index " + std::to_string(i) + " out of range for config '" +
                              config.name + "' with " + std::to_string(config.cable_count()) +
                              " cables");
}
}  // namespace detail

/// Cable vector l_i = p_Bi - p_Ai with p_Bi = p_0 + R v_i. Index is 0-based.
inline Vec3 cable_vector(const CdprConfig& config, const Pose& pose, std::size_t i) {
    detail::check_cable_index(config, i);
    return pose.position() + rotation_matrix(pose) * config.ee_offsets[i] - config.frame_anchors[i];
}

inline CableLengths inverse_kinematics(const CdprConfig& config, const Pose& pose) {
    if (!pose.finite()) throw ValidationError("inverse_kinematics: non-finite pose");
    const Mat3 r = rotation_matrix(pose);
    const Vec3 p = pose.position();
    Eigen::VectorXd out(static_cast<Eigen::Index>(config.cable_count()));
    for (std::size_t i = 0; i < config.cable_count(); ++i)
        out[static_cast<Eigen::Index>(i)] = (p + r * config.ee_offsets[i] - config.frame_anchors[i]).norm();
    return CableLengths(std::move(out));
}

}  // namespace cafk
