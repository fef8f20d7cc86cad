#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "splat/core/grid.hpp"
#include "splat/lie/se3.hpp"
#include "splat/scene/gaussian_map.hpp"
#include "splat/scene/projection.hpp"

namespace splat {

struct RasterConfig {
    double z_near = 0.01;
    double z_far = 100.0;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    int tile_size = 16;
    // Stop accumulating color/depth/alpha once transmittance drops below this.
    double stop_transmittance = 1e-4;
    bool early_stop = true;
    // Binary: production straight-through mask. Sigmoid: smooth surrogate
    // (forward uses sigma(b) directly) so the mask gradient has a finite-
    // difference counterpart.
    enum class MaskMode { kBinary, kSigmoid };
    MaskMode mask_mode = MaskMode::kBinary;
    double mask_epsilon = 0.01;
};

struct RenderCache; // internal replay state, defined in rasterizer.cpp

struct RenderOutput {
    ImageD color; // H x W x 3
    ImageD depth; // H x W, alpha-weighted mean depth (not normalized)
    ImageD alpha; // H x W
    std::vector<std::uint32_t> visible_ids; // sorted; compositing weight > 1e-6 somewhere
    Grid<int> contrib_count; // splats evaluated per pixel before the stop
    int degenerate_skipped = 0;
    std::shared_ptr<const RenderCache> cache;
};

// Tiled front-to-back compositor over the frustum-culled splat list.
RenderOutput render(const GaussianMap& map, const Pose& cam_from_world,
                    const CameraIntrinsics& cam, const RasterConfig& cfg = {});

// Brute force per-pixel loop over the same culled list, no tiles, no early
// stop. Oracle for render(); also used where exactness beats speed.
RenderOutput render_reference(const GaussianMap& map, const Pose& cam_from_world,
                              const CameraIntrinsics& cam, const RasterConfig& cfg = {});

struct RenderGradients {
    MapGradients params;
    Tangent pose = Tangent::Zero();
    // Per-splat norm of the summed 2D mean gradient, for densify bookkeeping.
    std::vector<double> mean2d_grad_norm;
};

// Analytic adjoint of render(). `out` must come from render() on the same
// map/pose/camera. Upstream images may be empty (treated as zero).
RenderGradients render_backward(const GaussianMap& map, const Pose& cam_from_world,
                                const CameraIntrinsics& cam, const RenderOutput& out,
                                const ImageD& d_color, const ImageD& d_depth,
                                const ImageD& d_alpha);

} // namespace splat
