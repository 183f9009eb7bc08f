// Inverse kinematics on a bundled robot, then recovery of the pose with the
// optimization FK solver.

#include <iostream>

#include "cafk/cafk.hpp"

int main() {
    const auto config = cafk::bundled_config("simc8");
    const cafk::Pose pose{420, 610, 380, 0.12, -0.08, 0};

    const auto lengths = cafk::inverse_kinematics(config, pose);
    std::cout << "lengths:";
    for (std::size_t i = 0; i < lengths.size(); ++i) std::cout << ' ' << lengths[i];
    std::cout << '\n';

    const auto sol = cafk::fk::solve_fk_opt(config, lengths);
    std::cout << "recovered: " << sol.pose.x << ' ' << sol.pose.y << ' ' << sol.pose.z << ' ' << sol.pose.roll
              << ' ' << sol.pose.pitch << ' ' << sol.pose.yaw << "\n"
              << "position error: " << (sol.pose.position() - pose.position()).norm() << " mm after "
              << sol.iterations << " iterations\n";
}
