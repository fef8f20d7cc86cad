#include "splat/lie/se3.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace splat {

namespace {

constexpr double kSmallAngle = 1e-8;

Eigen::Vector3d vee(const Eigen::Matrix3d& M) {
    return {M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1)};
}

} // namespace

Eigen::Matrix4d Pose::matrix() const {
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    M.topLeftCorner<3, 3>() = rotation;
    M.topRightCorner<3, 1>() = translation;
    return M;
}

Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& R) {
    return Eigen::Quaterniond(R).normalized().toRotationMatrix();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d S;
    S << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return S;
}

Pose se3_exp(const Tangent& tau) {
    const Eigen::Vector3d u = tau.head<3>();
    const Eigen::Vector3d omega = tau.tail<3>();
    const double theta2 = omega.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d K = skew(omega);
    const Eigen::Matrix3d K2 = K * K;

    // A = sin t / t, B = (1 - cos t)/t^2, C = (t - sin t)/t^3
    double A, B, C;
    if (theta < kSmallAngle) {
        A = 1.0 - theta2 / 6.0;
        B = 0.5 - theta2 / 24.0;
        C = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        A = std::sin(theta) / theta;
        B = (1.0 - std::cos(theta)) / theta2;
        C = (theta - std::sin(theta)) / (theta2 * theta);
    }

    Pose T;
    T.rotation = Eigen::Matrix3d::Identity() + A * K + B * K2;
    const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + B * K + C * K2;
    T.translation = V * u;
    return T;
}

Tangent se3_log(const Pose& T, bool* near_singular) {
    if (near_singular) *near_singular = false;
    const Eigen::Matrix3d& R = T.rotation;
    const double cos_theta = std::min(1.0, std::max(-1.0, (R.trace() - 1.0) * 0.5));
    const double theta = std::acos(cos_theta);
    const Eigen::Vector3d w = vee(R); // 2 sin(theta) * axis

    Eigen::Vector3d omega;
    if (theta < kSmallAngle) {
        omega = 0.5 * (1.0 + theta * theta / 6.0) * w;
    } else if (M_PI - theta < 1e-6) {
        // sin(theta) ~ 0 with theta ~ pi: recover the axis from the symmetric
        // part, pick the dominant diagonal for stability.
        if (near_singular) *near_singular = true;
        Eigen::Vector3d a;
        int k = 0;
        if (R(1, 1) > R(k, k)) k = 1;
        if (R(2, 2) > R(k, k)) k = 2;
        const double denom = 1.0 - cos_theta;
        a[k] = std::sqrt(std::max(0.0, (R(k, k) - cos_theta) / denom));
        for (int j = 0; j < 3; ++j)
            if (j != k) a[j] = (R(k, j) + R(j, k)) / (2.0 * denom * a[k]);
        a.normalize();
        if (a.dot(w) < 0.0) a = -a;
        omega = theta * a;
    } else {
        omega = (theta / (2.0 * std::sin(theta))) * w;
    }

    const double t2 = omega.squaredNorm();
    const double t = std::sqrt(t2);
    const Eigen::Matrix3d K = skew(omega);
    // coef = (1 - t sin t / (2 (1 - cos t))) / t^2, finite at pi
    double coef;
    if (t < 1e-4) {
        coef = 1.0 / 12.0 + t2 / 720.0;
    } else {
        coef = (1.0 - t * std::sin(t) / (2.0 * (1.0 - std::cos(t)))) / t2;
    }
    const Eigen::Matrix3d Vinv = Eigen::Matrix3d::Identity() - 0.5 * K + coef * (K * K);

    Tangent tau;
    tau.head<3>() = Vinv * T.translation;
    tau.tail<3>() = omega;
    return tau;
}

Pose se3_retract(const Tangent& tau, const Pose& T) {
    return se3_exp(tau).compose(T);
}

Eigen::Matrix<double, 3, 6> point_pose_jacobian(const Eigen::Vector3d& p_c) {
    Eigen::Matrix<double, 3, 6> J;
    J.leftCols<3>() = Eigen::Matrix3d::Identity();
    J.rightCols<3>() = -skew(p_c);
    return J;
}

Eigen::Matrix<double, 9, 6> rotation_pose_jacobian(const Eigen::Matrix3d& R) {
    Eigen::Matrix<double, 9, 6> J = Eigen::Matrix<double, 9, 6>::Zero();
    for (int col = 0; col < 3; ++col)
        J.block<3, 3>(3 * col, 3) = -skew(R.col(col));
    return J;
}

} // namespace splat
