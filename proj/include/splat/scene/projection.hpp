#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "splat/lie/se3.hpp"
#include "splat/scene/gaussian.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

// World-space covariance R S^2 R^T from a (not necessarily unit) quaternion
// and log-scales. Near-zero quaternions fall back to identity rotation.
Eigen::Matrix3d covariance_3d(const Eigen::Vector4d& q, const Eigen::Vector3d& log_scale);

struct ProjectedGaussian {
    Eigen::Vector2d mean2d;
    Eigen::Matrix2d cov2d; // includes the 0.3 px^2 diagonal floor
    double depth;          // camera-frame z
};

// Perspective projection of one splat; empty when the center is at or behind
// z_near. cov2d = J W Sigma W^T J^T + 0.3 I with J the pinhole Jacobian at
// the center.
std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const Pose& cam_from_world,
                                                  const CameraIntrinsics& cam,
                                                  double z_near = 0.01);

struct CulledSplat {
    int index;
    std::uint32_t id;
    Eigen::Vector2d mean2d;
    Eigen::Matrix2d cov2d;
    double depth;
};

// Splats whose 3-sigma image-plane box touches the image and whose depth lies
// in (z_near, z_far), sorted by depth ascending, ties by id ascending.
// Degenerate projections (non-finite or non-positive-definite cov2d) are
// skipped; *degenerate_count reports how many.
std::vector<CulledSplat> frustum_cull(const GaussianMap& map, const Pose& cam_from_world,
                                      const CameraIntrinsics& cam, double z_near, double z_far,
                                      int* degenerate_count = nullptr);

struct ProjectionGradIn {
    Eigen::Vector2d d_mean2d = Eigen::Vector2d::Zero();
    Eigen::Matrix2d d_cov2d = Eigen::Matrix2d::Zero(); // symmetric upstream
    double d_depth = 0.0;
};

struct ProjectionGradOut {
    Eigen::Vector3d d_position = Eigen::Vector3d::Zero();
    Eigen::Vector4d d_rotation = Eigen::Vector4d::Zero();
    Eigen::Vector3d d_log_scale = Eigen::Vector3d::Zero();
    Tangent d_pose = Tangent::Zero();
};

// Adjoint of project_gaussian. Pose gradient is in the left-multiplicative
// tangent (translation first) and includes both the point path and the
// rotation-of-covariance path.
ProjectionGradOut project_gaussian_backward(const Gaussian& g, const Pose& cam_from_world,
                                            const CameraIntrinsics& cam,
                                            const ProjectionGradIn& up);

} // namespace splat
