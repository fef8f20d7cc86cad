#pragma once

#include <span>

#include "splat/core/rng.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

struct DensifyConfig {
    double grad_threshold = 2e-4;  // mean 2D positional gradient norm
    double small_scale = 0.01;     // m; below this a hot splat clones, above it splits
    double split_shrink = 1.6;     // children scale divisor
    double opacity_prune = 0.05;   // sigma(opacity) below this is dropped
    double mask_epsilon = 0.01;
    bool densify = true;           // false: prune-only pass
};

struct DensifyReport {
    int before = 0;
    int cloned = 0;
    int split = 0;
    int pruned_opacity = 0;
    int pruned_mask = 0;
    int after = 0;
};

// Adaptive density control. grad_norm_avg is the per-splat mean of the
// accumulated 2D positional gradient norms since the last call (zero entries
// are never densified). Split children sample positions from the parent
// covariance via rng. Pruning drops low-opacity splats and, unless the map's
// masks were discarded, every splat whose binarized mask is 0.
DensifyReport densify_and_prune(GaussianMap& map, std::span<const double> grad_norm_avg,
                                const DensifyConfig& cfg, Rng& rng);

// Freezes the mask channel: binarized values become permanently 1 for the
// survivors. Calling with a forward-0 mask still present is a contract
// violation (prune first). Idempotent.
void discard_masks(GaussianMap& map, double mask_epsilon = 0.01);

} // namespace splat
