#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "splat/compact/densify.hpp"
#include "splat/compact/losses.hpp"
#include "splat/core/rng.hpp"
#include "splat/render/rasterizer.hpp"
#include "splat/scene/frame.hpp"
#include "splat/scene/gaussian_map.hpp"

namespace splat {

struct MappingConfig {
    int random_history = 2;        // n historical frames per iteration
    int iterations_per_update = 50;
    int insertion_stride = 4;
    int densify_interval = 150;    // global mapping iterations between passes
    int color_refine_interval = 10; // map updates between color refinements
    int color_refine_iterations = 10;
    int refinement_iterations = 2000;

    double scene_extent = 2.0; // m, scales the position rate
    double lr_position = 1.6e-4;
    double lr_color = 2.5e-3;
    double lr_opacity = 5e-2;
    double lr_scale = 5e-3;
    double lr_quaternion = 1e-3;
    double lr_mask = 1e-2;
    double lr_pose_translation = 1e-3;
    double lr_pose_rotation = 3e-4;

    DensifyConfig densify;
    LossWeights loss; // lambda_ssim / lambda_mask / epsilon / beta
};

struct MappingLossResult {
    double value = 0.0;
    double photometric = 0.0;
    double scale_reg = 0.0;
    MapGradients grads;
    std::vector<Tangent> window_pose_grads; // one per window frame
    std::vector<double> mean2d_norm;        // summed over frames, per splat
    std::vector<int> touch_count;           // renders in which the splat contributed
};

// Color L1 over window + history renders plus the scale-anchor regularizer
// beta * sum_j |S_j - S_mean|_1 (S_mean frozen per evaluation). Pose
// gradients are produced for window frames only.
MappingLossResult mapping_loss(const GaussianMap& map, std::span<const FramePtr> window,
                               std::span<const FramePtr> history, const CameraIntrinsics& cam,
                               const RasterConfig& rcfg, double scale_reg_beta,
                               bool with_grads = true);

struct MapUpdateReport {
    int iterations = 0;
    double first_loss = 0.0;
    double last_loss = 0.0;
    bool densified = false;
    DensifyReport densify;
};

// Owns the optimizer state for map parameters and window poses plus the
// densification bookkeeping. One Mapper instance per run.
class Mapper {
public:
    Mapper(MappingConfig cfg, RasterConfig rcfg, CameraIntrinsics cam, std::uint64_t seed);

    // iterations_per_update joint Adam steps over the window (+ resampled
    // history); densifies on the global cadence; updates window poses.
    MapUpdateReport map_update(GaussianMap& map, std::span<const FramePtr> window,
                               std::span<const FramePtr> history_pool);

    // One pass of the full scene loss on a random information keyframe,
    // poses frozen.
    void color_refinement(GaussianMap& map, std::span<const FramePtr> info_kfs);

    // Long photometric+mask polish over random keyframes, then a prune-only
    // density pass and mask discard.
    DensifyReport final_refinement(GaussianMap& map, std::span<const FramePtr> info_kfs);

    long global_iterations() const { return global_iter_; }
    int updates_done() const { return updates_; }
    const MappingConfig& config() const { return cfg_; }

private:
    void scene_loss_step(GaussianMap& map, const Frame& kf);
    void apply_map_step(GaussianMap& map, const MapGradients& grads);
    std::vector<FramePtr> sample_history(std::span<const FramePtr> pool, int n);

    MappingConfig cfg_;
    RasterConfig rcfg_;
    CameraIntrinsics cam_;
    Rng rng_;
    std::unordered_map<int, AdamMoments> pose_opt_; // keyed by frame index
    std::vector<double> densify_norm_;
    std::vector<int> densify_count_;
    long global_iter_ = 0;
    int updates_ = 0;
};

} // namespace splat
