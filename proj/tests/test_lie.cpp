#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "splat/core/rng.hpp"
#include "splat/lie/se3.hpp"

using namespace splat;

namespace {

Tangent random_tangent(Rng& rng, double rot_cap) {
    Tangent tau;
    for (int i = 0; i < 3; ++i) tau[i] = rng.uniform(-2.0, 2.0);
    Eigen::Vector3d w(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (w.norm() < 1e-12) w = Eigen::Vector3d::UnitX();
    w = w.normalized() * rng.uniform(0.0, rot_cap);
    tau.tail<3>() = w;
    return tau;
}

// independent rotation oracle: angle-axis through Eigen
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
    const double theta = w.norm();
    if (theta < 1e-300) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

double pose_distance(const Pose& a, const Pose& b) {
    return (a.rotation - b.rotation).norm() + (a.translation - b.translation).norm();
}

} // namespace

TEST_CASE("exp of zero is the identity") {
    const Pose T = se3_exp(Tangent::Zero());
    CHECK((T.rotation - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
    CHECK(T.translation.norm() == doctest::Approx(0.0));
}

TEST_CASE("skew matrix reproduces the cross product") {
    Rng rng(7);
    for (int k = 0; k < 20; ++k) {
        Eigen::Vector3d a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        Eigen::Vector3d b(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
    }
}

TEST_CASE("exp rotation block matches the angle-axis oracle") {
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        const Tangent tau = random_tangent(rng, 3.1);
        const Pose T = se3_exp(tau);
        CHECK((T.rotation - rodrigues(tau.tail<3>())).norm() < 1e-12);
    }
}

TEST_CASE("log inverts exp over 1000 random tangents") {
    Rng rng(13);
    for (int k = 0; k < 1000; ++k) {
        const Tangent tau = random_tangent(rng, 3.0); // safely inside the pi ball
        const Tangent back = se3_log(se3_exp(tau));
        CHECK((back - tau).norm() < 1e-7);
    }
}

TEST_CASE("tiny rotations use the series branch without blowing up") {
    for (double eps : {1e-14, 1e-10, 1e-8}) {
        Tangent tau = Tangent::Zero();
        tau << 0.3, -0.2, 0.1, eps, -eps, 0.5 * eps;
        const Tangent back = se3_log(se3_exp(tau));
        CHECK((back - tau).norm() < 1e-10);
    }
}

TEST_CASE("rotations near pi survive the log") {
    Rng rng(17);
    for (int k = 0; k < 50; ++k) {
        Eigen::Vector3d axis(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        axis.normalize();
        Tangent tau = Tangent::Zero();
        tau.tail<3>() = axis * (M_PI - 1e-7);
        tau.head<3>() << 0.4, -0.1, 0.2;

        const Pose T = se3_exp(tau);
        bool near_singular = false;
        const Tangent back = se3_log(T, &near_singular);
        CHECK(near_singular);
        // the axis sign is ambiguous at pi; require exp(log(T)) == T instead
        CHECK(pose_distance(se3_exp(back), T) < 1e-6);
    }
}

TEST_CASE("compose against inverse cancels") {
    Rng rng(19);
    for (int k = 0; k < 100; ++k) {
        const Pose T = se3_exp(random_tangent(rng, 3.0));
        const Pose I1 = T.compose(T.inverse());
        CHECK((I1.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
        CHECK(I1.translation.norm() < 1e-12);
    }
}

TEST_CASE("retract is the left-multiplicative update") {
    Rng rng(23);
    const Pose T = se3_exp(random_tangent(rng, 2.0));
    const Tangent tau = random_tangent(rng, 0.5);
    const Pose a = se3_retract(tau, T);
    const Pose b = se3_exp(tau).compose(T);
    CHECK(pose_distance(a, b) < 1e-14);
}

TEST_CASE("orthonormalize_rotation projects noisy matrices back onto SO(3)") {
    Rng rng(29);
    for (int k = 0; k < 50; ++k) {
        const Eigen::Matrix3d R = se3_exp(random_tangent(rng, 3.0)).rotation;
        // exact rotations pass through unchanged
        CHECK((orthonormalize_rotation(R) - R).norm() < 1e-12);

        Eigen::Matrix3d noisy = R;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) noisy(i, j) += 1e-3 * rng.uniform(-1.0, 1.0);
        const Eigen::Matrix3d fixed = orthonormalize_rotation(noisy);
        CHECK((fixed * fixed.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
        CHECK(fixed.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((fixed - R).norm() < 5e-3); // stays close to the original
    }
}

TEST_CASE("point_pose_jacobian matches central differences") {
    Rng rng(31);
    const double h = 1e-6;
    for (int k = 0; k < 25; ++k) {
        const Eigen::Vector3d p_c(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 4));
        const Eigen::Matrix<double, 3, 6> J = point_pose_jacobian(p_c);
        for (int d = 0; d < 6; ++d) {
            Tangent tp = Tangent::Zero();
            tp[d] = h;
            Tangent tm = Tangent::Zero();
            tm[d] = -h;
            const Eigen::Vector3d fd =
                (se3_exp(tp).apply(p_c) - se3_exp(tm).apply(p_c)) / (2.0 * h);
            CHECK((J.col(d) - fd).norm() < 1e-8);
        }
    }
}

TEST_CASE("rotation_pose_jacobian matches central differences") {
    Rng rng(37);
    const double h = 1e-6;
    for (int k = 0; k < 25; ++k) {
        const Eigen::Matrix3d R = se3_exp(random_tangent(rng, 3.0)).rotation;
        const Eigen::Matrix<double, 9, 6> J = rotation_pose_jacobian(R);
        for (int d = 0; d < 6; ++d) {
            Tangent tp = Tangent::Zero();
            tp[d] = h;
            Tangent tm = Tangent::Zero();
            tm[d] = -h;
            const Eigen::Matrix3d Rp = se3_exp(tp).rotation * R;
            const Eigen::Matrix3d Rm = se3_exp(tm).rotation * R;
            Eigen::Matrix<double, 9, 1> fd;
            // column-major vec to match the jacobian row ordering
            for (int c = 0; c < 3; ++c)
                for (int r = 0; r < 3; ++r) fd[3 * c + r] = (Rp(r, c) - Rm(r, c)) / (2.0 * h);
            CHECK((J.col(d) - fd).norm() < 1e-8);
        }
    }
}
