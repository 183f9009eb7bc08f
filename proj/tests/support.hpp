#pragma once

#include <random>
#include <vector>

#include "cafk/config_io.hpp"
#include "cafk/core.hpp"

namespace cafk::testing_support {

/// Config with explicit anchors/offsets and wide spatial bounds.
inline CdprConfig make_config(std::vector<Vec3> anchors, std::vector<Vec3> offsets) {
    CdprConfig c;
    c.name = "custom";
    c.frame_anchors = std::move(anchors);
    c.ee_offsets = std::move(offsets);
    c.pose_lower << -2000, -2000, -2000, -kPi, -kPi, -kPi;
    c.pose_upper << 2000, 2000, 2000, kPi, kPi, kPi;
    return c;
}

inline Pose random_pose_in(const CdprConfig& c, std::mt19937_64& rng) {
    Vec6 q;
    for (int k = 0; k < 6; ++k)
        q[k] = std::uniform_real_distribution<double>(c.pose_lower[k], c.pose_upper[k])(rng);
    q = q.cwiseMax(c.pose_lower).cwiseMin(c.pose_upper);
    return Pose::from_vector(q);
}

}  // namespace cafk::testing_support
