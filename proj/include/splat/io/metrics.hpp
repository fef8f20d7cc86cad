#pragma once

#include "splat/core/grid.hpp"
#include "splat/io/trajectory.hpp"

namespace splat {

// Absolute trajectory error in centimeters. Poses are associated by nearest
// timestamp within 20 ms; a rigid transform (rotation + translation, no
// scale) aligning the estimate to the reference is solved in closed form
// before computing the RMSE over camera centers. Throws if fewer than 3
// pairs associate.
double ate_rmse_cm(const Trajectory& estimate, const Trajectory& reference);

// Peak signal-to-noise ratio in dB for [0,1] images, MSE over every sample.
// Near-identical images (MSE < 1e-10) report the 100 dB cap.
double psnr(const ImageD& a, const ImageD& b);

} // namespace splat
