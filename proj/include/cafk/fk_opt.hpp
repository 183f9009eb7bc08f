#pragma once

// Optimization-based forward kinematics: bounded nonlinear least squares over
// the pose, minimizing || L - IK(Q) ||^2 subject to Q_lb <= Q <= Q_ub.
//
// Solved with Levenberg-Marquardt (Marquardt diagonal scaling) and projection
// of every trial point onto the box. Pose coordinates whose lower and upper
// bounds coincide are frozen at that value and removed from the problem.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cafk/core.hpp"

namespace cafk::fk {

struct FkOptSettings {
    Vec6 lower = Vec6::Zero();
    Vec6 upper = Vec6::Zero();
    Vec6 initial_guess = Vec6::Zero();
    int max_iterations = 200;
    double residual_tolerance = 1e-9;  // mm
    double step_tolerance = 1e-12;     // relative to the size of the free variables
    double initial_damping = 1e-3;

    /// Config bounds with the box midpoint as initial guess.
    static FkOptSettings defaults_for(const CdprConfig& config) {
        FkOptSettings s;
        s.lower = config.pose_lower;
        s.upper = config.pose_upper;
        s.initial_guess = 0.5 * (config.pose_lower + config.pose_upper);
        return s;
    }

    void validate() const {
        for (int k = 0; k < 6; ++k)
            if (!(lower[k] <= upper[k]))
                throw InfeasibleBounds("fk-opt: lower bound exceeds upper bound at index " + std::to_string(k));
        if (!initial_guess.allFinite() || ((initial_guess - lower).array() < 0).any() ||
            ((upper - initial_guess).array() < 0).any())
            throw ValidationError("fk-opt: initial guess outside bounds");
        if (max_iterations < 1) throw ValidationError("fk-opt: max_iterations must be positive");
        if (!(residual_tolerance > 0) || !(step_tolerance > 0))
            throw ValidationError("fk-opt: tolerances must be positive");
        if (!(initial_damping > 0)) throw ValidationError("fk-opt: initial damping must be positive");
    }
};

enum class FkStatus { ResidualConverged, StepConverged, MaxIterationsExceeded };

struct FkSolution {
    Pose pose;
    double residual_norm = 0;  // mm
    int iterations = 0;
    bool converged = false;
    FkStatus status = FkStatus::MaxIterationsExceeded;
    /// ||r||^2 at the initial guess and after every accepted step.
    std::vector<double> objective_history;
};

/// r_i = target_i - ||l_i(pose)||.
inline Eigen::VectorXd residuals(const CdprConfig& config, const Pose& pose, const CableLengths& target) {
    if (target.size() != config.cable_count())
        throw ConfigMismatch("fk-opt: target has " + std::to_string(target.size()) + " lengths, config '" +
                             config.name + "' has " + std::to_string(config.cable_count()) + " cables");
    return target.values() - inverse_kinematics(config, pose).values();
}

/// Analytic Jacobian of `residuals` with respect to the 6 pose coordinates (m x 6).
inline Eigen::MatrixXd residual_jacobian(const CdprConfig& config, const Pose& pose) {
    const double cr = std::cos(pose.roll), sr = std::sin(pose.roll);
    const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);
    const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
    Mat3 rx, ry, rz, drx, dry, drz;
    rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
    ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
    rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
    drx << 0, 0, 0, 0, -sr, -cr, 0, cr, -sr;
    dry << -sp, 0, cp, 0, 0, 0, -cp, 0, -sp;
    drz << -sy, -cy, 0, cy, -sy, 0, 0, 0, 0;
    const Mat3 r = rz * ry * rx;
    const Mat3 d_roll = rz * ry * drx;
    const Mat3 d_pitch = rz * dry * rx;
    const Mat3 d_yaw = drz * ry * rx;

    const Vec3 p = pose.position();
    const auto m = static_cast<Eigen::Index>(config.cable_count());
    Eigen::MatrixXd jac(m, 6);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vec3& v = config.ee_offsets[static_cast<std::size_t>(i)];
        const Vec3 l = p + r * v - config.frame_anchors[static_cast<std::size_t>(i)];
        const double n = l.norm();
        if (n == 0.0) {
            // Gradient of the norm is undefined at 0; treat as flat.
            jac.row(i).setZero();
            continue;
        }
        const Vec3 u = l / n;
        jac(i, 0) = -u.x();
        jac(i, 1) = -u.y();
        jac(i, 2) = -u.z();
        jac(i, 3) = -u.dot(d_roll * v);
        jac(i, 4) = -u.dot(d_pitch * v);
        jac(i, 5) = -u.dot(d_yaw * v);
    }
    return jac;
}

/// Central finite-difference Jacobian, step = rel_step * max(1, |q_k|).
inline Eigen::MatrixXd residual_jacobian_fd(const CdprConfig& config, const Pose& pose, double rel_step = 1e-6) {
    const Vec6 q = pose.to_vector();
    const auto m = static_cast<Eigen::Index>(config.cable_count());
    Eigen::MatrixXd jac(m, 6);
    for (int k = 0; k < 6; ++k) {
        const double h = rel_step * std::max(1.0, std::abs(q[k]));
        Vec6 qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        // d r / dq = -(d ||l|| / dq)
        jac.col(k) = -(inverse_kinematics(config, Pose::from_vector(qp)).values() -
                       inverse_kinematics(config, Pose::from_vector(qm)).values()) /
                     (2 * h);
    }
    return jac;
}

/// Bounded Levenberg-Marquardt solve of the FK problem for `target`.
inline FkSolution solve_fk_opt(const CdprConfig& config, const CableLengths& target, const FkOptSettings& settings) {
    settings.validate();
    if (target.size() != config.cable_count())
        throw ConfigMismatch("fk-opt: target/config cable count mismatch");

    std::vector<int> free;
    for (int k = 0; k < 6; ++k)
        if (settings.lower[k] < settings.upper[k]) free.push_back(k);
    const auto nf = static_cast<Eigen::Index>(free.size());

    Vec6 q = settings.initial_guess;
    for (int k = 0; k < 6; ++k)
        if (settings.lower[k] == settings.upper[k]) q[k] = settings.lower[k];

    Eigen::VectorXd r = residuals(config, Pose::from_vector(q), target);
    double cost = r.squaredNorm();

    FkSolution sol;
    sol.objective_history.push_back(cost);
    double damping = settings.initial_damping;

    auto finish = [&](FkStatus status, int iterations) {
        sol.pose = Pose::from_vector(q);
        sol.residual_norm = std::sqrt(cost);
        sol.iterations = iterations;
        sol.status = status;
        sol.converged = status != FkStatus::MaxIterationsExceeded;
        return sol;
    };

    if (nf == 0) return finish(FkStatus::StepConverged, 0);

    for (int it = 0; it < settings.max_iterations; ++it) {
        if (std::sqrt(cost) < settings.residual_tolerance) return finish(FkStatus::ResidualConverged, it);

        const Eigen::MatrixXd full = residual_jacobian(config, Pose::from_vector(q));
        Eigen::MatrixXd jac(full.rows(), nf);
        for (Eigen::Index c = 0; c < nf; ++c) jac.col(c) = full.col(free[static_cast<std::size_t>(c)]);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        Eigen::VectorXd scale = jtj.diagonal();
        const double floor = std::max(scale.maxCoeff() * 1e-12, std::numeric_limits<double>::min());
        scale = scale.cwiseMax(floor);

        double qnorm = 0;
        for (int k : free) qnorm += q[k] * q[k];
        qnorm = std::sqrt(qnorm);

        // Inner loop: raise damping until a step decreases the objective.
        for (;;) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += damping * scale;
            // r = L - IK(q) and J = dr/dq, so the Gauss-Newton step solves (J^T J) d = -J^T r.
            const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);

            Vec6 trial = q;
            for (Eigen::Index c = 0; c < nf; ++c) {
                const int k = free[static_cast<std::size_t>(c)];
                trial[k] = std::clamp(q[k] + step[c], settings.lower[k], settings.upper[k]);
            }
            const double step_norm = (trial - q).norm();
            if (!std::isfinite(step_norm) || step_norm <= settings.step_tolerance * (qnorm + settings.step_tolerance))
                return finish(FkStatus::StepConverged, it + 1);

            const Eigen::VectorXd r_trial = residuals(config, Pose::from_vector(trial), target);
            const double cost_trial = r_trial.squaredNorm();
            if (cost_trial < cost) {
                q = trial;
                r = r_trial;
                cost = cost_trial;
                sol.objective_history.push_back(cost);
                damping = std::max(damping / 10, 1e-15);
                break;
            }
            damping *= 10;
        }
    }
    if (std::sqrt(cost) < settings.residual_tolerance) return finish(FkStatus::ResidualConverged, settings.max_iterations);
    return finish(FkStatus::MaxIterationsExceeded, settings.max_iterations);
}

inline FkSolution solve_fk_opt(const CdprConfig& config, const CableLengths& target) {
    return solve_fk_opt(config, target, FkOptSettings::defaults_for(config));
}

}  // namespace cafk::fk
