#include "splat/scene/projection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

namespace splat {

namespace {

constexpr double kCovFloor = 0.3; // px^2, keeps tiny splats at least ~1 px

Eigen::Matrix3d quat_to_rot(const Eigen::Vector4d& q_unit) {
    const double w = q_unit[0], x = q_unit[1], y = q_unit[2], z = q_unit[3];
    Eigen::Matrix3d R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Eigen::Vector4d normalized_quat(const Eigen::Vector4d& q, double* norm_out = nullptr) {
    double n = q.norm();
    if (norm_out) *norm_out = n;
    if (n < 1e-12) return {1.0, 0.0, 0.0, 0.0};
    return q / n;
}

// 2x3 pinhole Jacobian at camera point p
Eigen::Matrix<double, 2, 3> pinhole_jacobian(const Eigen::Vector3d& p, const CameraIntrinsics& cam) {
    const double z = p.z(), iz = 1.0 / z, iz2 = iz * iz;
    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx * iz, 0.0, -cam.fx * p.x() * iz2,
         0.0, cam.fy * iz, -cam.fy * p.y() * iz2;
    return J;
}

// dL/dR for R appearing as R D R^T with D = diag(exp(2*ls)), plus dL/dls.
void covariance_backward(const Eigen::Matrix3d& R, const Eigen::Vector3d& log_scale,
                         const Eigen::Matrix3d& d_sigma, Eigen::Matrix3d& d_R,
                         Eigen::Vector3d& d_log_scale) {
    const Eigen::Vector3d s2 = (2.0 * log_scale).array().exp();
    const Eigen::Matrix3d Gs = 0.5 * (d_sigma + d_sigma.transpose());
    d_R = 2.0 * Gs * R * s2.asDiagonal();
    const Eigen::Matrix3d RtGR = R.transpose() * Gs * R;
    for (int k = 0; k < 3; ++k) d_log_scale[k] = 2.0 * s2[k] * RtGR(k, k);
}

// dR/dq for a unit quaternion, contracted with d_R.
Eigen::Vector4d rotation_quat_backward(const Eigen::Vector4d& q_unit, const Eigen::Matrix3d& d_R) {
    const double w = q_unit[0], x = q_unit[1], y = q_unit[2], z = q_unit[3];
    Eigen::Matrix3d dRdw, dRdx, dRdy, dRdz;
    dRdw << 0, -z, y,
            z, 0, -x,
            -y, x, 0;
    dRdx << 0, y, z,
            y, -2 * x, -w,
            z, w, -2 * x;
    dRdy << -2 * y, x, w,
            x, 0, z,
            -w, z, -2 * y;
    dRdz << -2 * z, -w, x,
            w, -2 * z, y,
            x, y, 0;
    Eigen::Vector4d g;
    g[0] = 2.0 * (d_R.array() * dRdw.array()).sum();
    g[1] = 2.0 * (d_R.array() * dRdx.array()).sum();
    g[2] = 2.0 * (d_R.array() * dRdy.array()).sum();
    g[3] = 2.0 * (d_R.array() * dRdz.array()).sum();
    return g;
}

} // namespace

Eigen::Matrix3d covariance_3d(const Eigen::Vector4d& q, const Eigen::Vector3d& log_scale) {
    const Eigen::Matrix3d R = quat_to_rot(normalized_quat(q));
    const Eigen::Vector3d s2 = (2.0 * log_scale).array().exp();
    return R * s2.asDiagonal() * R.transpose();
}

std::optional<ProjectedGaussian> project_gaussian(const Gaussian& g, const Pose& cam_from_world,
                                                  const CameraIntrinsics& cam, double z_near) {
    const Eigen::Vector3d p_c = cam_from_world.apply(g.position);
    if (p_c.z() <= z_near) return std::nullopt;

    const Eigen::Matrix<double, 2, 3> J = pinhole_jacobian(p_c, cam);
    const Eigen::Matrix<double, 2, 3> M = J * cam_from_world.rotation;
    const Eigen::Matrix3d sigma = covariance_3d(g.rotation, g.log_scale);

    ProjectedGaussian out;
    out.mean2d = {cam.fx * p_c.x() / p_c.z() + cam.cx, cam.fy * p_c.y() / p_c.z() + cam.cy};
    out.cov2d = M * sigma * M.transpose() + kCovFloor * Eigen::Matrix2d::Identity();
    out.depth = p_c.z();
    return out;
}

std::vector<CulledSplat> frustum_cull(const GaussianMap& map, const Pose& cam_from_world,
                                      const CameraIntrinsics& cam, double z_near, double z_far,
                                      int* degenerate_count) {
    std::vector<CulledSplat> out;
    out.reserve(map.size());
    int degenerate = 0;
    const double x_lo = -0.5, x_hi = cam.width - 0.5;
    const double y_lo = -0.5, y_hi = cam.height - 0.5;

    for (int i = 0; i < map.size(); ++i) {
        auto proj = project_gaussian(map.get(i), cam_from_world, cam, z_near);
        if (!proj || proj->depth >= z_far) continue;
        const Eigen::Matrix2d& C = proj->cov2d;
        const double det = C(0, 0) * C(1, 1) - C(0, 1) * C(1, 0);
        if (!std::isfinite(det) || det <= 0.0 || !proj->mean2d.allFinite()) {
            ++degenerate;
            continue;
        }
        // largest eigenvalue of the 2x2 covariance
        const double mid = 0.5 * (C(0, 0) + C(1, 1));
        const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
        const double r = 3.0 * std::sqrt(lam_max);
        const double mx = proj->mean2d.x(), my = proj->mean2d.y();
        if (mx + r < x_lo || mx - r > x_hi || my + r < y_lo || my - r > y_hi) continue;
        out.push_back({i, map.id_at(i), proj->mean2d, C, proj->depth});
    }

    std::sort(out.begin(), out.end(), [](const CulledSplat& a, const CulledSplat& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id < b.id;
    });
    if (degenerate_count) *degenerate_count = degenerate;
    return out;
}

ProjectionGradOut project_gaussian_backward(const Gaussian& g, const Pose& cam_from_world,
                                            const CameraIntrinsics& cam,
                                            const ProjectionGradIn& up) {
    ProjectionGradOut out;
    const Eigen::Matrix3d& W = cam_from_world.rotation;
    const Eigen::Vector3d p_c = cam_from_world.apply(g.position);
    const double z = p_c.z(), iz = 1.0 / z, iz2 = iz * iz, iz3 = iz2 * iz;

    double q_norm = 0.0;
    const Eigen::Vector4d q_unit = normalized_quat(g.rotation, &q_norm);
    const Eigen::Matrix3d R = quat_to_rot(q_unit);
    const Eigen::Vector3d s2 = (2.0 * g.log_scale).array().exp();
    const Eigen::Matrix3d sigma = R * s2.asDiagonal() * R.transpose();

    const Eigen::Matrix<double, 2, 3> J = pinhole_jacobian(p_c, cam);
    const Eigen::Matrix<double, 2, 3> M = J * W;

    const Eigen::Matrix2d Gc = 0.5 * (up.d_cov2d + up.d_cov2d.transpose());

    // cov2d = M sigma M^T
    const Eigen::Matrix<double, 2, 3> d_M = 2.0 * Gc * M * sigma;
    const Eigen::Matrix3d d_sigma = M.transpose() * Gc * M;
    const Eigen::Matrix<double, 2, 3> d_J = d_M * W.transpose();
    const Eigen::Matrix3d d_W = J.transpose() * d_M;

    // mean2d shares J with the covariance path; J itself depends on p_c
    Eigen::Vector3d d_pc = J.transpose() * up.d_mean2d;
    d_pc.x() += d_J(0, 2) * (-cam.fx * iz2);
    d_pc.y() += d_J(1, 2) * (-cam.fy * iz2);
    d_pc.z() += d_J(0, 0) * (-cam.fx * iz2) + d_J(1, 1) * (-cam.fy * iz2) +
                d_J(0, 2) * (2.0 * cam.fx * p_c.x() * iz3) +
                d_J(1, 2) * (2.0 * cam.fy * p_c.y() * iz3);
    d_pc.z() += up.d_depth;

    out.d_position = W.transpose() * d_pc;

    out.d_pose = point_pose_jacobian(p_c).transpose() * d_pc;
    for (int col = 0; col < 3; ++col)
        out.d_pose.tail<3>() += W.col(col).cross(d_W.col(col));

    Eigen::Matrix3d d_R;
    covariance_backward(R, g.log_scale, d_sigma, d_R, out.d_log_scale);
    const Eigen::Vector4d d_q_unit = rotation_quat_backward(q_unit, d_R);
    if (q_norm < 1e-12) {
        out.d_rotation.setZero(); // fallback branch is locally constant
    } else {
        out.d_rotation = (d_q_unit - q_unit * q_unit.dot(d_q_unit)) / q_norm;
    }
    return out;
}

} // namespace splat
