#include "splat/track/tracker.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "splat/opt/adam.hpp"

namespace splat {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

TrackingLoss tracking_loss(const GaussianMap& map, const Pose& pose, const Frame& frame,
                           const CameraIntrinsics& cam, const RasterConfig& rcfg,
                           double depth_weight) {
    if (frame.rgb.height() != cam.height || frame.rgb.width() != cam.width)
        throw std::invalid_argument("tracking_loss: frame/camera size mismatch");

    const RenderOutput out = render(map, pose, cam, rcfg);

    TrackingLoss tl;
    const int h = cam.height, w = cam.width;
    const double inv_p = 1.0 / (static_cast<double>(h) * w);

    int valid_depth = 0;
    if (frame.has_depth()) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (frame.depth.at(y, x) > 0.0) ++valid_depth;
    }
    const double inv_d = valid_depth ? 1.0 / valid_depth : 0.0;

    ImageD d_color(h, w, 3), d_depth(h, w, 1), d_alpha(h, w, 1);
    bool any_alpha = false;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double a = out.alpha.at(y, x);
            if (a > 0.0) any_alpha = true;

            double abs_sum = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double r = out.color.at(y, x, c) - frame.rgb.at(y, x, c);
                abs_sum += std::abs(r);
                d_color.at(y, x, c) = inv_p * a * sgn(r);
            }
            tl.rgb_term += a * abs_sum;
            d_alpha.at(y, x) = inv_p * abs_sum;

            if (valid_depth && frame.depth.at(y, x) > 0.0) {
                const double rd = out.depth.at(y, x) - frame.depth.at(y, x);
                tl.depth_term += a * std::abs(rd);
                d_depth.at(y, x) = depth_weight * inv_d * a * sgn(rd);
                d_alpha.at(y, x) += depth_weight * inv_d * std::abs(rd);
            }
        }
    }
    tl.rgb_term *= inv_p;
    tl.depth_term *= inv_d;
    tl.value = tl.rgb_term + depth_weight * tl.depth_term;

    if (!any_alpha) {
        tl.lost = true;
        return tl;
    }

    const RenderGradients rg = render_backward(map, pose, cam, out, d_color,
                                               valid_depth ? d_depth : ImageD{}, d_alpha);
    tl.pose_grad = rg.pose;
    return tl;
}

TrackResult track_keyframe(const GaussianMap& map, const Frame& frame,
                           const CameraIntrinsics& cam, const TrackingConfig& cfg,
                           const RasterConfig& rcfg) {
    if (cfg.iterations < 1 || cfg.lr_rotation <= 0.0 || cfg.lr_translation <= 0.0)
        throw std::invalid_argument("track_keyframe: bad config");

    TrackResult res;
    res.pose = frame.pose;

    Pose pose = frame.pose;
    Pose best_pose = pose;
    double best_loss = std::numeric_limits<double>::infinity();

    AdamMoments st;
    st.resize(6);
    double lrs[6] = {cfg.lr_translation, cfg.lr_translation, cfg.lr_translation,
                     cfg.lr_rotation, cfg.lr_rotation, cfg.lr_rotation};

    for (int it = 0; it < cfg.iterations; ++it) {
        const TrackingLoss tl = tracking_loss(map, pose, frame, cam, rcfg, cfg.depth_weight);
        if (tl.lost) {
            res.lost = true;
            res.iterations = it;
            return res; // caller keeps the motion-model pose
        }
        if (it == 0) res.initial_loss = tl.value;
        if (tl.value < best_loss) {
            best_loss = tl.value;
            best_pose = pose;
        }

        // Adam step in the tangent at the current pose, applied by retraction
        double x[6] = {0, 0, 0, 0, 0, 0};
        adam_step_mixed(st, std::span<double>(x, 6),
                        std::span<const double>(tl.pose_grad.data(), 6),
                        std::span<const double>(lrs, 6));
        Tangent step;
        for (int k = 0; k < 6; ++k) step[k] = x[k];
        pose = se3_retract(step, pose);
        res.iterations = it + 1;
        if (step.norm() < cfg.convergence_tol) break;
    }

    // the last retraction was never scored
    const TrackingLoss tl = tracking_loss(map, pose, frame, cam, rcfg, cfg.depth_weight);
    if (!tl.lost && tl.value < best_loss) {
        best_loss = tl.value;
        best_pose = pose;
    }

    res.pose = best_pose;
    res.final_loss = best_loss;
    return res;
}

} // namespace splat
