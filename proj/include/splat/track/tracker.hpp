#pragma once

#include "splat/lie/se3.hpp"
#include "splat/render/rasterizer.hpp"
#include "splat/scene/frame.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

struct TrackingConfig {
    int iterations = 60;
    double lr_rotation = 3e-3;
    double lr_translation = 1e-3;
    double convergence_tol = 1e-5; // tangent step norm
    double depth_weight = 1.0;     // weight on the depth error term
};

struct TrackingLoss {
    double value = 0.0;
    Tangent pose_grad = Tangent::Zero();
    double rgb_term = 0.0;
    double depth_term = 0.0;
    bool lost = false; // nothing rendered (alpha identically zero)
};

// Alpha-weighted L1 photometric error (color, plus depth when the frame has
// it) of the map rendered at `pose` against the frame, with its pose-tangent
// gradient. Needs only frame.rgb/depth.
TrackingLoss tracking_loss(const GaussianMap& map, const Pose& pose, const Frame& frame,
                           const CameraIntrinsics& cam, const RasterConfig& rcfg,
                           double depth_weight);

struct TrackResult {
    Pose pose;
    bool lost = false;
    int iterations = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Adam on the 6-dim tangent with fresh optimizer state, left-multiplicative
// updates, best-loss pose returned. Starts from frame.pose.
TrackResult track_keyframe(const GaussianMap& map, const Frame& frame,
                           const CameraIntrinsics& cam, const TrackingConfig& cfg,
                           const RasterConfig& rcfg);

} // namespace splat
