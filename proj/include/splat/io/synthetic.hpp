#pragma once

#include <cstdint>

#include "splat/io/dataset.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

struct SyntheticSpec {
  int gaussians = 300;
  int frames = 60;
  int image_size = 64;
  double box_half_extent = 1.0; // splat centers in [-h, h]^3
  double orbit_radius = 2.6;
  double orbit_span_deg = 60.0; // arc swept over all frames
  double camera_height = 0.6;
  double focal = 70.0;
  double fps = 30.0;
  // gaussian depth-sensor noise, meters; real RGB-D depth is never exact
  double depth_noise_sigma = 0.03;
};

struct SyntheticScene {
  Dataset dataset;        // rendered color/depth + exact poses as ground truth
  GaussianMap ground_truth_map;
};

// Deterministic random scene: splats drawn inside a box, camera orbiting the
// origin with a z-up look-at. Frames are produced by the reference renderer;
// stored depth is the alpha-normalized composited depth where coverage is
// solid (alpha >= 0.5) and 0 (invalid) elsewhere. Same seed, same bytes.
SyntheticScene generate_synthetic(std::uint64_t seed, const SyntheticSpec& spec = {});

} // namespace splat
