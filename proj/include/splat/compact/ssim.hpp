#pragma once

#include "splat/core/grid.hpp"

namespace splat {

// Mean SSIM over pixels and channels, 11x11 Gaussian window (sigma 1.5),
// C1 = 0.01^2, C2 = 0.03^2. Window weights are renormalized where the window
// hangs off the border, so constant images score exactly and ssim(a,a) == 1.
// If d_a is non-null it receives d(ssim)/da (same shape as a).
double ssim(const ImageD& a, const ImageD& b, ImageD* d_a = nullptr);

} // namespace splat
