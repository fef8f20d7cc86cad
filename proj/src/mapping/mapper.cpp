#include "splat/mapping/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "splat/opt/adam.hpp"

namespace splat {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

MappingLossResult mapping_loss(const GaussianMap& map, std::span<const FramePtr> window,
                               std::span<const FramePtr> history, const CameraIntrinsics& cam,
                               const RasterConfig& rcfg, double scale_reg_beta, bool with_grads) {
    if (window.empty()) throw std::invalid_argument("mapping_loss: empty window");

    MappingLossResult res;
    const int n = map.size();
    if (with_grads) {
        res.grads.resize_zero(n);
        res.window_pose_grads.assign(window.size(), Tangent::Zero());
        res.mean2d_norm.assign(n, 0.0);
        res.touch_count.assign(n, 0);
    }

    const double inv_p = 1.0 / (static_cast<double>(cam.height) * cam.width);

    auto add_frame = [&](const Frame& f, Tangent* pose_grad) {
        const RenderOutput out = render(map, f.pose, cam, rcfg);
        double l1 = 0.0;
        ImageD d_color;
        if (with_grads) d_color = ImageD(cam.height, cam.width, 3);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const double r = out.color.at(y, x, c) - f.rgb.at(y, x, c);
                    l1 += std::abs(r);
                    if (with_grads) d_color.at(y, x, c) = inv_p * sgn(r);
                }
            }
        }
        res.photometric += l1 * inv_p;
        if (with_grads) {
            const RenderGradients rg =
                render_backward(map, f.pose, cam, out, d_color, ImageD{}, ImageD{});
            res.grads.add(rg.params);
            if (pose_grad) *pose_grad += rg.pose;
            for (int i = 0; i < n; ++i) {
                if (rg.mean2d_grad_norm[i] > 0.0) {
                    res.mean2d_norm[i] += rg.mean2d_grad_norm[i];
                    ++res.touch_count[i];
                }
            }
        }
    };

    for (std::size_t i = 0; i < window.size(); ++i)
        add_frame(*window[i], with_grads ? &res.window_pose_grads[i] : nullptr);
    for (const FramePtr& f : history) add_frame(*f, nullptr);

    // scale anchor: penalize spread around the (frozen) per-axis mean scale
    if (n > 0 && scale_reg_beta > 0.0) {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i) mean += map.log_scale(i).array().exp().matrix();
        mean /= n;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d s = map.log_scale(i).array().exp();
            for (int k = 0; k < 3; ++k) {
                res.scale_reg += std::abs(s[k] - mean[k]);
                if (with_grads)
                    res.grads.log_scale[3 * i + k] += scale_reg_beta * sgn(s[k] - mean[k]) * s[k];
            }
        }
    }

    res.value = res.photometric + scale_reg_beta * res.scale_reg;
    return res;
}

Mapper::Mapper(MappingConfig cfg, RasterConfig rcfg, CameraIntrinsics cam, std::uint64_t seed)
    : cfg_(std::move(cfg)), rcfg_(rcfg), cam_(cam), rng_(seed) {}

std::vector<FramePtr> Mapper::sample_history(std::span<const FramePtr> pool, int n) {
    std::vector<FramePtr> cand(pool.begin(), pool.end());
    std::vector<FramePtr> out;
    const int take = std::min<int>(n, static_cast<int>(cand.size()));
    for (int k = 0; k < take; ++k) {
        const int j = rng_.uniform_int(k, static_cast<int>(cand.size()) - 1);
        std::swap(cand[k], cand[j]);
        out.push_back(cand[k]);
    }
    return out;
}

void Mapper::apply_map_step(GaussianMap& map, const MapGradients& grads) {
    const int n = map.size();
    auto span = [](double* p, std::size_t len) { return std::span<double>(p, len); };
    auto cspan = [](const std::vector<double>& v) {
        return std::span<const double>(v.data(), v.size());
    };
    MapOptState& opt = map.opt();
    adam_step(opt.position, span(map.position_data(), 3 * n), cspan(grads.position),
              cfg_.lr_position * cfg_.scene_extent);
    adam_step(opt.rotation, span(map.rotation_data(), 4 * n), cspan(grads.rotation),
              cfg_.lr_quaternion);
    adam_step(opt.log_scale, span(map.log_scale_data(), 3 * n), cspan(grads.log_scale),
              cfg_.lr_scale);
    adam_step(opt.opacity, span(map.opacity_data(), n), cspan(grads.opacity), cfg_.lr_opacity);
    adam_step(opt.color, span(map.color_data(), 3 * n), cspan(grads.color), cfg_.lr_color);
    if (!map.masks_discarded())
        adam_step(opt.mask, span(map.mask_data(), n), cspan(grads.mask), cfg_.lr_mask);
    map.renormalize_quaternions();
}

MapUpdateReport Mapper::map_update(GaussianMap& map, std::span<const FramePtr> window,
                                   std::span<const FramePtr> history_pool) {
    if (window.empty()) throw std::invalid_argument("map_update: empty window");

    MapUpdateReport rep;

    // keep history disjoint from the window
    std::vector<FramePtr> pool;
    for (const FramePtr& f : history_pool) {
        bool in_window = false;
        for (const FramePtr& w : window)
            if (w->index == f->index) in_window = true;
        if (!in_window) pool.push_back(f);
    }

    densify_norm_.resize(map.size(), 0.0);
    densify_count_.resize(map.size(), 0);

    for (int it = 0; it < cfg_.iterations_per_update; ++it) {
        const std::vector<FramePtr> history = sample_history(pool, cfg_.random_history);
        MappingLossResult res = mapping_loss(map, window, history, cam_, rcfg_,
                                             cfg_.loss.scale_reg_beta, true);
        if (it == 0) rep.first_loss = res.value;
        rep.last_loss = res.value;

        apply_map_step(map, res.grads);

        for (std::size_t i = 0; i < window.size(); ++i) {
            AdamMoments& st = pose_opt_[window[i]->index];
            if (st.m.empty()) st.resize(6);
            double x[6] = {0, 0, 0, 0, 0, 0};
            const double lrs[6] = {cfg_.lr_pose_translation, cfg_.lr_pose_translation,
                                   cfg_.lr_pose_translation, cfg_.lr_pose_rotation,
                                   cfg_.lr_pose_rotation,    cfg_.lr_pose_rotation};
            adam_step_mixed(st, std::span<double>(x, 6),
                            std::span<const double>(res.window_pose_grads[i].data(), 6),
                            std::span<const double>(lrs, 6));
            Tangent step;
            for (int k = 0; k < 6; ++k) step[k] = x[k];
            window[i]->pose = se3_retract(step, window[i]->pose);
        }

        for (int i = 0; i < map.size(); ++i) {
            densify_norm_[i] += res.mean2d_norm[i];
            densify_count_[i] += res.touch_count[i];
        }

        ++global_iter_;
        ++rep.iterations;

        if (cfg_.densify.densify && cfg_.densify_interval > 0 &&
            global_iter_ % cfg_.densify_interval == 0) {
            std::vector<double> avg(map.size(), 0.0);
            for (int i = 0; i < map.size(); ++i)
                if (densify_count_[i] > 0) avg[i] = densify_norm_[i] / densify_count_[i];
            rep.densify = densify_and_prune(map, avg, cfg_.densify, rng_);
            rep.densified = true;
            densify_norm_.assign(map.size(), 0.0);
            densify_count_.assign(map.size(), 0);
        }
    }

    ++updates_;
    return rep;
}

void Mapper::scene_loss_step(GaussianMap& map, const Frame& kf) {
    const RenderOutput out = render(map, kf.pose, cam_, rcfg_);
    ImageD d_rendered;
    MapGradients grads;
    grads.resize_zero(map.size());
    total_scene_loss(out.color, kf.rgb, map, cfg_.loss, &d_rendered,
                     std::span<double>(grads.mask.data(), grads.mask.size()));
    const RenderGradients rg = render_backward(map, kf.pose, cam_, out, d_rendered, {}, {});
    grads.add(rg.params);
    apply_map_step(map, grads);
}

void Mapper::color_refinement(GaussianMap& map, std::span<const FramePtr> info_kfs) {
    if (info_kfs.empty() || map.size() == 0) return;
    const FramePtr& kf = info_kfs[rng_.uniform_int(0, static_cast<int>(info_kfs.size()) - 1)];
    for (int it = 0; it < cfg_.color_refine_iterations; ++it) scene_loss_step(map, *kf);
}

DensifyReport Mapper::final_refinement(GaussianMap& map, std::span<const FramePtr> info_kfs) {
    if (info_kfs.empty() || map.size() == 0) return {};
    for (int it = 0; it < cfg_.refinement_iterations; ++it) {
        const FramePtr& kf = info_kfs[rng_.uniform_int(0, static_cast<int>(info_kfs.size()) - 1)];
        scene_loss_step(map, *kf);
    }
    DensifyConfig prune_only = cfg_.densify;
    prune_only.densify = false;
    const DensifyReport rep = densify_and_prune(map, {}, prune_only, rng_);
    discard_masks(map, cfg_.loss.mask_epsilon);
    return rep;
}

} // namespace splat
