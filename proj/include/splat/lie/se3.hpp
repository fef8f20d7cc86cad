#pragma once

#include <Eigen/Core>

namespace splat {

// Tangent ordering: translation (0..2), then rotation (3..5).
using Tangent = Eigen::Matrix<double, 6, 1>;

// Rigid transform, camera-from-world unless stated otherwise.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    Pose compose(const Pose& rhs) const {
        return {rotation * rhs.rotation, rotation * rhs.translation + translation};
    }

    Pose inverse() const {
        Eigen::Matrix3d rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    Eigen::Matrix4d matrix() const;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// Nearest rotation (quaternion projection). Compositions that feed back into
// themselves (e.g. velocity extrapolation) must pass through this, or the
// float dust in R R^T - I compounds geometrically.
Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& R);

Pose se3_exp(const Tangent& tau);

// Inverse of se3_exp. Rotations within ~1e-6 of pi are numerically delicate;
// when near_singular is non-null it is set accordingly and the returned value
// comes from the stable axis extraction.
Tangent se3_log(const Pose& T, bool* near_singular = nullptr);

// Left-multiplicative update: T <- se3_exp(tau) * T.
Pose se3_retract(const Tangent& tau, const Pose& T);

// d(p_c)/d(tau) for p_c = R p_w + t under the left perturbation, evaluated at
// tau = 0. Depends only on the already-transformed point.
Eigen::Matrix<double, 3, 6> point_pose_jacobian(const Eigen::Vector3d& p_c);

// d(vec(R'))/d(tau) where R' = exp(tau_rot)^ * R, rows ordered column-major
// (Eigen vec convention). Translation block is zero.
Eigen::Matrix<double, 9, 6> rotation_pose_jacobian(const Eigen::Matrix3d& R);

} // namespace splat
