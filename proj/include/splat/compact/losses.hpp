#pragma once

#include <span>

#include "splat/core/grid.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

struct LossWeights {
    double lambda_ssim = 0.2;  // weight on (1 - ssim) vs L1
    double lambda_mask = 5e-4; // weight on the mask sparsity term
    double mask_epsilon = 0.01;
    double scale_reg_beta = 10.0; // scale anchor weight in the mapping loss
};

// (1 - w) * mean|r - gt| + w * (1 - ssim(r, gt)). d_rendered, when non-null,
// receives the full derivative.
double photometric_ssim_loss(const ImageD& rendered, const ImageD& gt, double lambda_ssim,
                             ImageD* d_rendered = nullptr);

// Mean sigmoid of the mask logits: pushes masks toward zero so binarization
// can drop splats. Gradient (d mean / d logit) is accumulated into d_mask.
double mask_loss(const GaussianMap& map, std::span<double> d_mask = {});

// Photometric + weighted mask term, the per-view training objective.
double total_scene_loss(const ImageD& rendered, const ImageD& gt, const GaussianMap& map,
                        const LossWeights& w, ImageD* d_rendered = nullptr,
                        std::span<double> d_mask = {});

} // namespace splat
