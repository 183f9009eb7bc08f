#include <gtest/gtest.h>

#include <random>

#include "cafk/config_io.hpp"
#include "cafk/data.hpp"
#include "cafk/fk_opt.hpp"

using namespace cafk;
using namespace cafk::fk;

namespace {

Pose interior_pose(const CdprConfig& c, std::mt19937_64& rng) {
    // Random pose in the inner 80% of the box, so central differences stay in bounds.
    Vec6 q;
    for (int k = 0; k < 6; ++k) {
        const double mid = 0.5 * (c.pose_lower[k] + c.pose_upper[k]);
        const double half = 0.4 * (c.pose_upper[k] - c.pose_lower[k]);
        q[k] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng);
    }
    return Pose::from_vector(q);
}

}  // namespace

TEST(Residuals, ZeroAtExactTarget) {
    const auto c = bundled_config("simc8");
    const Pose p{420, 515, 610, 0.1, -0.05, 0};
    EXPECT_EQ(residuals(c, p, inverse_kinematics(c, p)), Eigen::VectorXd::Zero(8));
}

TEST(Residuals, InflatedTargetShiftsByOne) {
    const auto c = bundled_config("simc8");
    const Pose p{420, 515, 610, 0.1, -0.05, 0};
    const CableLengths inflated((inverse_kinematics(c, p).values().array() + 1.0).matrix());
    const Eigen::VectorXd r = residuals(c, p, inflated);
    for (Eigen::Index i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], 1.0, 1e-12);
}

TEST(Residuals, MatchesSubtractionOracle) {
    const auto c = bundled_config("simc7");
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> len(100, 1500);
    for (int k = 0; k < 20; ++k) {
        const Pose p = interior_pose(c, rng);
        Eigen::VectorXd t(7);
        for (auto& v : t) v = len(rng);
        const Eigen::VectorXd r = residuals(c, p, CableLengths(t));
        for (std::size_t i = 0; i < 7; ++i)
            EXPECT_DOUBLE_EQ(r[static_cast<Eigen::Index>(i)], t[static_cast<Eigen::Index>(i)] - cable_vector(c, p, i).norm());
    }
}

TEST(Residuals, WrongCountIsConfigMismatch) {
    const auto c = bundled_config("simc6");
    EXPECT_THROW(residuals(c, {}, CableLengths{1, 2, 3}), ConfigMismatch);
    EXPECT_THROW(solve_fk_opt(c, CableLengths{1, 2, 3}), ConfigMismatch);
}

TEST(Jacobian, MatchesCentralDifferences) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> angle(-0.26, 0.26);
    for (const auto& c : bundled_configs()) {
        for (int k = 0; k < 20; ++k) {
            Pose p = interior_pose(c, rng);
            if (!c.planar) p.yaw = angle(rng);  // exercise the yaw column too
            const Eigen::MatrixXd a = residual_jacobian(c, p);
            const Eigen::MatrixXd fd = residual_jacobian_fd(c, p);
            const double rel = (a - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff());
            ASSERT_LT(rel, 1e-5) << c.name;
        }
    }
}

TEST(Settings, DefaultsFollowConfig) {
    const auto s = FkOptSettings::defaults_for(bundled_config("simc6"));
    Vec6 guess;
    guess << 500, 500, 500, 0, 0, 0;
    EXPECT_EQ(s.initial_guess, guess);
    EXPECT_EQ(s.max_iterations, 200);
    EXPECT_EQ(s.residual_tolerance, 1e-9);
    EXPECT_EQ(s.step_tolerance, 1e-12);
}

TEST(Settings, InfeasibleBoundsAndBadGuess) {
    const auto c = bundled_config("simc6");
    const auto target = inverse_kinematics(c, {500, 500, 500, 0, 0, 0});
    auto s = FkOptSettings::defaults_for(c);
    s.lower[0] = 950;
    EXPECT_THROW(solve_fk_opt(c, target, s), InfeasibleBounds);
    s = FkOptSettings::defaults_for(c);
    s.initial_guess[1] = 50;
    EXPECT_THROW(solve_fk_opt(c, target, s), ValidationError);
}

TEST(Solve, FullyConstrainedRoundTrip) {
    std::mt19937_64 rng(77);
    for (const std::string name : {"simc6", "simc7", "simc8", "simc9", "simc10", "expc4"}) {
        const auto c = bundled_config(name);
        int good = 0;
        for (int k = 0; k < 200; ++k) {
            const Pose truth = data::random_pose(c, rng);
            const auto sol = solve_fk_opt(c, inverse_kinematics(c, truth));
            if ((sol.pose.position() - truth.position()).norm() < 0.1) ++good;
        }
        EXPECT_GE(good, 198) << name;
    }
}

TEST(Solve, UnderConstrainedErrorIsMuchLarger) {
    std::mt19937_64 rng(78);
    auto mean_error = [&](const CdprConfig& c) {
        double sum = 0;
        for (int k = 0; k < 100; ++k) {
            const Pose truth = data::random_pose(c, rng);
            sum += (solve_fk_opt(c, inverse_kinematics(c, truth)).pose.position() - truth.position()).norm();
        }
        return sum / 100;
    };
    const double under = mean_error(bundled_config("simc4"));
    const double full = mean_error(bundled_config("simc8"));
    EXPECT_GT(under, 1.0);
    EXPECT_GT(under, 1000 * full);
}

TEST(Solve, MonotoneDescentAndBoundFeasibility) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(200, 1400);
    for (const auto& c : bundled_configs()) {
        const auto s = FkOptSettings::defaults_for(c);
        for (int k = 0; k < 30; ++k) {
            // Arbitrary targets: usually inconsistent, so bounds become active.
            Eigen::VectorXd t(static_cast<Eigen::Index>(c.cable_count()));
            for (auto& v : t) v = len(rng);
            const auto sol = solve_fk_opt(c, CableLengths(t), s);
            for (std::size_t h = 1; h < sol.objective_history.size(); ++h)
                ASSERT_LE(sol.objective_history[h], sol.objective_history[h - 1]);
            const Vec6 q = sol.pose.to_vector();
            ASSERT_TRUE(((q - s.lower).array() >= 0).all() && ((s.upper - q).array() >= 0).all()) << c.name;
            ASSERT_GE(sol.residual_norm, 0.0);
        }
    }
}

TEST(Solve, FrozenCoordinatesStayAtBound) {
    const auto c = bundled_config("simc8");
    const auto sol = solve_fk_opt(c, inverse_kinematics(c, {300, 600, 450, 0.1, -0.1, 0}));
    EXPECT_EQ(sol.pose.yaw, 0.0);
    const auto e = bundled_config("expc4");
    const auto planar = solve_fk_opt(e, inverse_kinematics(e, {300, 600, 0, 0, 0, 0.2}));
    EXPECT_EQ(planar.pose.z, 0.0);
    EXPECT_EQ(planar.pose.roll, 0.0);
    EXPECT_EQ(planar.pose.pitch, 0.0);
    EXPECT_NEAR(planar.pose.yaw, 0.2, 1e-9);
}

TEST(Solve, IterationLimitReportsNotConverged) {
    const auto c = bundled_config("simc8");
    auto s = FkOptSettings::defaults_for(c);
    s.max_iterations = 1;
    const auto sol = solve_fk_opt(c, inverse_kinematics(c, {150, 850, 200, 0.2, -0.2, 0}), s);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.status, FkStatus::MaxIterationsExceeded);
    EXPECT_LT(sol.objective_history.back(), sol.objective_history.front());
}

TEST(Solve, ExactGuessConvergesImmediately) {
    const auto c = bundled_config("simc6");
    const auto sol = solve_fk_opt(c, inverse_kinematics(c, {500, 500, 500, 0, 0, 0}));
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.status, FkStatus::ResidualConverged);
    EXPECT_EQ(sol.iterations, 0);
}
