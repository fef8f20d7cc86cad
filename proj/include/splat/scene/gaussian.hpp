#pragma once

#include <Eigen/Core>
#include <cmath>

namespace splat {

// One anisotropic splat. Rotation is a (w, x, y, z) quaternion, not required
// to stay unit-length between optimizer steps; covariance construction
// normalizes. Scales are stored as logs, opacity and mask as logits.
struct Gaussian {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};
    Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
    double opacity_logit = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double mask_logit = 0.0;
};

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    double depth_scale = 5000.0; // 16-bit depth PNG units per meter
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace splat
