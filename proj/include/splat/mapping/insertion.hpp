#pragma once

#include "splat/render/rasterizer.hpp"
#include "splat/scene/frame.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

// Seeds splats from an RGB-D keyframe: every `stride`-th pixel with valid
// depth that the current map does not already cover (rendered alpha < 0.5)
// back-projects to a new isotropic Gaussian. Returns the number added.
// Frames without depth add nothing.
int insert_gaussians(GaussianMap& map, const Frame& kf, const CameraIntrinsics& cam,
                     const RasterConfig& rcfg, int stride = 4);

} // namespace splat
