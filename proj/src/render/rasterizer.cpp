#include "splat/render/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splat {

namespace {

// Kernel values below kKernelCut are skipped by both the tiled and the
// reference path, and the binning radius is derived from the same constant,
// so the two renderers evaluate identical term sequences.
constexpr double kKernelCut = 1e-10;
const double kPowerCut = std::log(1.0 / kKernelCut); // ~23.03
constexpr double kVisWeight = 1e-6;  // compositing weight that marks a splat visible
constexpr double kVisTransCut = 1e-7; // keep scanning for visibility until T drops here

struct SplatRec {
    int map_index;
    std::uint32_t id;
    double mx, my;
    double con_a, con_b, con_c; // conic (inverse cov2d)
    double depth;
    double opacity; // sigmoid(opacity_logit)
    double blend;   // mask forward value
    double alpha_coeff;
    Eigen::Vector3d color;
    double radius; // kernel support radius in px
};

} // namespace

struct RenderCache {
    RasterConfig cfg;
    std::vector<SplatRec> splats; // depth-sorted
    std::vector<std::vector<int>> tile_bins;
    int tiles_x = 0, tiles_y = 0;
    bool tiled = false;
    ImageD final_t; // transmittance when accumulation stopped
};

namespace {

double mask_blend(double mask_logit, const RasterConfig& cfg, bool discarded) {
    if (discarded) return 1.0;
    const double s = sigmoid(mask_logit);
    if (cfg.mask_mode == RasterConfig::MaskMode::kSigmoid) return s;
    return s >= cfg.mask_epsilon ? 1.0 : 0.0;
}

std::vector<SplatRec> build_splat_list(const GaussianMap& map, const Pose& pose,
                                       const CameraIntrinsics& cam, const RasterConfig& cfg,
                                       int* degenerate) {
    auto culled = frustum_cull(map, pose, cam, cfg.z_near, cfg.z_far, degenerate);
    std::vector<SplatRec> recs;
    recs.reserve(culled.size());
    for (const CulledSplat& c : culled) {
        const double a = c.cov2d(0, 0), b = c.cov2d(0, 1), d = c.cov2d(1, 1);
        const double det = a * d - b * b; // > 0, frustum_cull dropped the rest
        const double blend = mask_blend(map.mask_logit(c.index), cfg, map.masks_discarded());
        const double opacity = sigmoid(map.opacity_logit(c.index));
        if (opacity * blend <= 0.0) continue;

        SplatRec r;
        r.map_index = c.index;
        r.id = c.id;
        r.mx = c.mean2d.x();
        r.my = c.mean2d.y();
        r.con_a = d / det;
        r.con_b = -b / det;
        r.con_c = a / det;
        r.depth = c.depth;
        r.opacity = opacity;
        r.blend = blend;
        r.alpha_coeff = opacity * blend;
        r.color = map.color(c.index);
        const double mid = 0.5 * (a + d);
        const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
        r.radius = std::sqrt(2.0 * kPowerCut * lam_max);
        recs.push_back(r);
    }
    return recs;
}

void bin_splats(RenderCache& cache, const CameraIntrinsics& cam) {
    const int ts = cache.cfg.tile_size;
    cache.tiles_x = (cam.width + ts - 1) / ts;
    cache.tiles_y = (cam.height + ts - 1) / ts;
    cache.tile_bins.assign(static_cast<std::size_t>(cache.tiles_x) * cache.tiles_y, {});
    for (int s = 0; s < static_cast<int>(cache.splats.size()); ++s) {
        const SplatRec& r = cache.splats[s];
        int tx0 = std::max(0, static_cast<int>(std::floor((r.mx - r.radius) / ts)));
        int tx1 = std::min(cache.tiles_x - 1, static_cast<int>(std::floor((r.mx + r.radius) / ts)));
        int ty0 = std::max(0, static_cast<int>(std::floor((r.my - r.radius) / ts)));
        int ty1 = std::min(cache.tiles_y - 1, static_cast<int>(std::floor((r.my + r.radius) / ts)));
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                cache.tile_bins[static_cast<std::size_t>(ty) * cache.tiles_x + tx].push_back(s);
    }
}

// Front-to-back compositing of one pixel over a splat index sequence.
// Accumulation freezes at the early-stop threshold; the scan continues for
// visibility marking until transmittance is negligible.
template <typename It>
void composite_pixel(RenderCache& cache, It begin, It end, int y, int x,
                     RenderOutput& out, std::vector<char>& visible) {
    const RasterConfig& cfg = cache.cfg;
    double T = 1.0;
    double acc_c[3] = {0, 0, 0};
    double acc_d = 0.0;
    int contribs = 0;
    bool accumulating = true;
    double frozen_t = 1.0;

    for (It it = begin; it != end; ++it) {
        const SplatRec& s = cache.splats[*it];
        const double dx = x - s.mx, dy = y - s.my;
        const double power =
            0.5 * (s.con_a * dx * dx + s.con_c * dy * dy) + s.con_b * dx * dy;
        if (power > kPowerCut || power < 0.0) continue;
        const double g = std::exp(-power);
        const double alpha = s.alpha_coeff * g;
        if (alpha <= 0.0) continue;

        const double w = alpha * T;
        if (w > kVisWeight) visible[s.map_index] = 1;

        if (accumulating) {
            for (int c = 0; c < 3; ++c) acc_c[c] += w * s.color[c];
            acc_d += w * s.depth;
            ++contribs;
            T *= 1.0 - alpha;
            if (cfg.early_stop && T < cfg.stop_transmittance) {
                accumulating = false;
                frozen_t = T;
            }
        } else {
            T *= 1.0 - alpha;
            if (T < kVisTransCut) break;
        }
    }
    if (accumulating) frozen_t = T;

    for (int c = 0; c < 3; ++c) out.color.at(y, x, c) = acc_c[c] + cfg.background[c] * frozen_t;
    out.depth.at(y, x) = acc_d;
    out.alpha.at(y, x) = 1.0 - frozen_t;
    out.contrib_count.at(y, x) = contribs;
    cache.final_t.at(y, x) = frozen_t;
}

RenderOutput run_render(const GaussianMap& map, const Pose& pose, const CameraIntrinsics& cam,
                        const RasterConfig& cfg, bool tiled) {
    if (cam.width <= 0 || cam.height <= 0)
        throw std::invalid_argument("render: camera has empty image");

    auto cache = std::make_shared<RenderCache>();
    cache->cfg = cfg;
    if (!tiled) cache->cfg.early_stop = false;
    cache->tiled = tiled;

    RenderOutput out;
    out.color = ImageD(cam.height, cam.width, 3);
    out.depth = ImageD(cam.height, cam.width, 1);
    out.alpha = ImageD(cam.height, cam.width, 1);
    out.contrib_count = Grid<int>(cam.height, cam.width, 1);
    cache->final_t = ImageD(cam.height, cam.width, 1, 1.0);

    cache->splats = build_splat_list(map, pose, cam, cache->cfg, &out.degenerate_skipped);

    std::vector<char> visible(map.size(), 0);

    if (tiled) {
        bin_splats(*cache, cam);
        // tiles processed serially in row-major order: deterministic
        for (int ty = 0; ty < cache->tiles_y; ++ty) {
            for (int tx = 0; tx < cache->tiles_x; ++tx) {
                const auto& bin = cache->tile_bins[static_cast<std::size_t>(ty) * cache->tiles_x + tx];
                const int y1 = std::min(cam.height, (ty + 1) * cfg.tile_size);
                const int x1 = std::min(cam.width, (tx + 1) * cfg.tile_size);
                for (int y = ty * cfg.tile_size; y < y1; ++y)
                    for (int x = tx * cfg.tile_size; x < x1; ++x)
                        composite_pixel(*cache, bin.begin(), bin.end(), y, x, out, visible);
            }
        }
    } else {
        std::vector<int> all(cache->splats.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                composite_pixel(*cache, all.begin(), all.end(), y, x, out, visible);
    }

    for (int i = 0; i < map.size(); ++i)
        if (visible[i]) out.visible_ids.push_back(map.id_at(i));
    std::sort(out.visible_ids.begin(), out.visible_ids.end());
    out.cache = std::move(cache);
    return out;
}

} // namespace

RenderOutput render(const GaussianMap& map, const Pose& cam_from_world,
                    const CameraIntrinsics& cam, const RasterConfig& cfg) {
    return run_render(map, cam_from_world, cam, cfg, true);
}

RenderOutput render_reference(const GaussianMap& map, const Pose& cam_from_world,
                              const CameraIntrinsics& cam, const RasterConfig& cfg) {
    return run_render(map, cam_from_world, cam, cfg, false);
}

namespace {

struct Contribution {
    int splat; // index into cache.splats
    double alpha, g, dx, dy, t_before;
};

// Per-splat pixel-space accumulators gathered in stage 1.
struct SplatAccum {
    double d_mx = 0, d_my = 0;
    double d_con_a = 0, d_con_b = 0, d_con_c = 0;
    double d_alpha_coeff = 0;
    double d_depth = 0;
    Eigen::Vector3d d_color = Eigen::Vector3d::Zero();
    bool touched = false;
};

template <typename It>
void backward_pixel(const RenderCache& cache, It begin, It end, int y, int x,
                    const RenderOutput& out, const double* dc, double dd, double da,
                    std::vector<Contribution>& scratch, std::vector<SplatAccum>& acc) {
    const int n = out.contrib_count.at(y, x);
    if (n == 0) return;

    scratch.clear();
    double T = 1.0;
    for (It it = begin; it != end && static_cast<int>(scratch.size()) < n; ++it) {
        const SplatRec& s = cache.splats[*it];
        const double dx = x - s.mx, dy = y - s.my;
        const double power =
            0.5 * (s.con_a * dx * dx + s.con_c * dy * dy) + s.con_b * dx * dy;
        if (power > kPowerCut || power < 0.0) continue;
        const double g = std::exp(-power);
        const double alpha = s.alpha_coeff * g;
        if (alpha <= 0.0) continue;
        scratch.push_back({*it, alpha, g, dx, dy, T});
        T *= 1.0 - alpha;
    }

    const double t_end = cache.final_t.at(y, x);
    // dL/dT_end pieces: background through color, alpha = 1 - T_end
    const double k_end = da - (dc[0] * cache.cfg.background[0] + dc[1] * cache.cfg.background[1] +
                               dc[2] * cache.cfg.background[2]);

    // back-to-front with suffix sums of accumulated color/depth
    double s_c[3] = {0, 0, 0};
    double s_d = 0.0;
    for (int i = static_cast<int>(scratch.size()) - 1; i >= 0; --i) {
        const Contribution& ct = scratch[i];
        const SplatRec& s = cache.splats[ct.splat];
        SplatAccum& a = acc[ct.splat];
        a.touched = true;

        const double w = ct.alpha * ct.t_before;
        const double one_minus = 1.0 - ct.alpha;

        double d_alpha = ct.t_before * (dc[0] * s.color[0] + dc[1] * s.color[1] +
                                        dc[2] * s.color[2] + dd * s.depth);
        d_alpha += (k_end * t_end - (dc[0] * s_c[0] + dc[1] * s_c[1] + dc[2] * s_c[2]) -
                    dd * s_d) / one_minus;

        for (int c = 0; c < 3; ++c) a.d_color[c] += dc[c] * w;
        a.d_depth += dd * w;

        a.d_alpha_coeff += d_alpha * ct.g;
        const double d_power = -d_alpha * ct.alpha; // dL/dG * dG/dpower, G' = -G
        a.d_con_a += d_power * 0.5 * ct.dx * ct.dx;
        a.d_con_b += d_power * ct.dx * ct.dy;
        a.d_con_c += d_power * 0.5 * ct.dy * ct.dy;
        const double d_dx = d_power * (s.con_a * ct.dx + s.con_b * ct.dy);
        const double d_dy = d_power * (s.con_b * ct.dx + s.con_c * ct.dy);
        a.d_mx -= d_dx;
        a.d_my -= d_dy;

        for (int c = 0; c < 3; ++c) s_c[c] += s.color[c] * w;
        s_d += s.depth * w;
    }
}

} // namespace

RenderGradients render_backward(const GaussianMap& map, const Pose& cam_from_world,
                                const CameraIntrinsics& cam, const RenderOutput& out,
                                const ImageD& d_color, const ImageD& d_depth,
                                const ImageD& d_alpha) {
    if (!out.cache) throw std::invalid_argument("render_backward: output has no cache");
    const RenderCache& cache = *out.cache;

    RenderGradients grads;
    grads.params.resize_zero(map.size());
    grads.mean2d_grad_norm.assign(map.size(), 0.0);

    std::vector<SplatAccum> acc(cache.splats.size());
    std::vector<Contribution> scratch;
    scratch.reserve(256);

    const bool has_c = !d_color.empty();
    const bool has_d = !d_depth.empty();
    const bool has_a = !d_alpha.empty();

    auto pixel_grads = [&](int y, int x, double* dc, double& dd, double& da) {
        dc[0] = has_c ? d_color.at(y, x, 0) : 0.0;
        dc[1] = has_c ? d_color.at(y, x, 1) : 0.0;
        dc[2] = has_c ? d_color.at(y, x, 2) : 0.0;
        dd = has_d ? d_depth.at(y, x) : 0.0;
        da = has_a ? d_alpha.at(y, x) : 0.0;
    };

    if (cache.tiled) {
        for (int ty = 0; ty < cache.tiles_y; ++ty) {
            for (int tx = 0; tx < cache.tiles_x; ++tx) {
                const auto& bin = cache.tile_bins[static_cast<std::size_t>(ty) * cache.tiles_x + tx];
                const int y1 = std::min(cam.height, (ty + 1) * cache.cfg.tile_size);
                const int x1 = std::min(cam.width, (tx + 1) * cache.cfg.tile_size);
                for (int y = ty * cache.cfg.tile_size; y < y1; ++y) {
                    for (int x = tx * cache.cfg.tile_size; x < x1; ++x) {
                        double dc[3], dd, da;
                        pixel_grads(y, x, dc, dd, da);
                        if (dc[0] == 0 && dc[1] == 0 && dc[2] == 0 && dd == 0 && da == 0) continue;
                        backward_pixel(cache, bin.begin(), bin.end(), y, x, out, dc, dd, da,
                                       scratch, acc);
                    }
                }
            }
        }
    } else {
        std::vector<int> all(cache.splats.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                double dc[3], dd, da;
                pixel_grads(y, x, dc, dd, da);
                if (dc[0] == 0 && dc[1] == 0 && dc[2] == 0 && dd == 0 && da == 0) continue;
                backward_pixel(cache, all.begin(), all.end(), y, x, out, dc, dd, da, scratch, acc);
            }
        }
    }

    // stage 2: pixel-space accumulators -> parameter gradients
    for (std::size_t si = 0; si < cache.splats.size(); ++si) {
        const SplatAccum& a = acc[si];
        if (!a.touched) continue;
        const SplatRec& s = cache.splats[si];
        const int i = s.map_index;

        // conic -> covariance: dL/dCov = -Conic * Mg * Conic
        Eigen::Matrix2d conic;
        conic << s.con_a, s.con_b, s.con_b, s.con_c;
        Eigen::Matrix2d mg;
        mg << a.d_con_a, 0.5 * a.d_con_b, 0.5 * a.d_con_b, a.d_con_c;
        const Eigen::Matrix2d d_cov = -conic * mg * conic;

        ProjectionGradIn up;
        up.d_mean2d = {a.d_mx, a.d_my};
        up.d_cov2d = d_cov;
        up.d_depth = a.d_depth;
        const ProjectionGradOut pg =
            project_gaussian_backward(map.get(i), cam_from_world, cam, up);

        for (int c = 0; c < 3; ++c) {
            grads.params.position[3 * i + c] += pg.d_position[c];
            grads.params.log_scale[3 * i + c] += pg.d_log_scale[c];
            grads.params.color[3 * i + c] += a.d_color[c];
        }
        for (int c = 0; c < 4; ++c) grads.params.rotation[4 * i + c] += pg.d_rotation[c];
        grads.pose += pg.d_pose;

        const double so = s.opacity;
        grads.params.opacity[i] += a.d_alpha_coeff * s.blend * so * (1.0 - so);
        if (!map.masks_discarded()) {
            // straight-through: binary forward, sigmoid-slope backward
            const double sb = sigmoid(map.mask_logit(i));
            grads.params.mask[i] += a.d_alpha_coeff * so * sb * (1.0 - sb);
        }
        grads.mean2d_grad_norm[i] = std::hypot(a.d_mx, a.d_my);
    }
    return grads;
}

} // namespace splat
