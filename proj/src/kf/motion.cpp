#include "splat/kf/motion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "splat/kf/correlation.hpp"

namespace splat {

namespace {

constexpr int kSearch = 8;          // cells each side
constexpr double kReliable = 0.3;   // min peak correlation
constexpr double kLowTexture = 0.25;

// peak offset of the parabola through (f(-1), f(0), f(+1)), clamped to half a
// sample; flat or non-concave fits stay at 0
double quadratic_peak(double fm, double f0, double fp) {
    const double denom = fm - 2.0 * f0 + fp;
    if (denom >= -1e-12) return 0.0;
    const double d = 0.5 * (fm - fp) / denom;
    return std::clamp(d, -0.5, 0.5);
}

} // namespace

FlowField motion_vector(const FeatureMap& f_prev, const FeatureMap& f_cur) {
    if (f_prev.rows != f_cur.rows || f_prev.cols != f_cur.cols)
        throw std::invalid_argument("motion_vector: feature grids differ in size");

    const CorrelationPyramid pyr = build_pyramid(correlation(f_prev, f_cur));
    const CorrVolume& l0 = pyr.levels[0];
    const CorrVolume& l1 = pyr.levels[1];

    FlowField out;
    out.flow = Grid<double>(l0.h1, l0.w1, 2);
    out.reliable = Grid<unsigned char>(l0.h1, l0.w1, 1);

    int reliable_count = 0;
    double norm_sum = 0.0;

    for (int r = 0; r < l0.h1; ++r) {
        for (int c = 0; c < l0.w1; ++c) {
            const int u_lo = std::max(0, r - kSearch), u_hi = std::min(l0.h2 - 1, r + kSearch);
            const int v_lo = std::max(0, c - kSearch), v_hi = std::min(l0.w2 - 1, c + kSearch);

            // coarse: best level-1 bin whose cells overlap the search window
            int bp = -1, bq = -1;
            float best1 = -2.f;
            for (int p = u_lo / 2; p <= u_hi / 2; ++p) {
                for (int q = v_lo / 2; q <= v_hi / 2; ++q) {
                    const float val = l1.at(r, c, p, q);
                    if (val > best1) {
                        best1 = val;
                        bp = p;
                        bq = q;
                    }
                }
            }

            // fine: exact level-0 cell inside the winning bin
            int bu = -1, bv = -1;
            float best0 = -2.f;
            for (int u = std::max(u_lo, 2 * bp); u <= std::min(u_hi, 2 * bp + 1); ++u) {
                for (int v = std::max(v_lo, 2 * bq); v <= std::min(v_hi, 2 * bq + 1); ++v) {
                    const float val = l0.at(r, c, u, v);
                    if (val > best0) {
                        best0 = val;
                        bu = u;
                        bv = v;
                    }
                }
            }

            double du = bu - r, dv = bv - c;
            if (bu > 0 && bu < l0.h2 - 1)
                du += quadratic_peak(l0.at(r, c, bu - 1, bv), best0, l0.at(r, c, bu + 1, bv));
            if (bv > 0 && bv < l0.w2 - 1)
                dv += quadratic_peak(l0.at(r, c, bu, bv - 1), best0, l0.at(r, c, bu, bv + 1));

            out.flow.at(r, c, 0) = dv; // x displacement
            out.flow.at(r, c, 1) = du; // y displacement
            const bool ok = best0 >= kReliable;
            out.reliable.at(r, c) = ok ? 1 : 0;
            if (ok) {
                ++reliable_count;
                norm_sum += std::sqrt(du * du + dv * dv);
            }
        }
    }

    const int total = l0.h1 * l0.w1;
    out.reliable_fraction = total ? static_cast<double>(reliable_count) / total : 0.0;
    out.mean_norm = reliable_count ? norm_sum / reliable_count : 0.0;
    out.low_texture = out.reliable_fraction < kLowTexture;
    return out;
}

MotionDecision motion_filter(const MotionFilterState& state, const Frame& frame,
                             const WindowConfig& cfg) {
    MotionDecision d;
    if (!state.last_kf) {
        d.keyframe = true;
        d.predicted_pose = Pose{}; // dataset convention: first frame at identity
        d.reason = "first_frame";
        return d;
    }
    if (!frame.features || !state.last_kf->features)
        throw std::invalid_argument("motion_filter: features missing");

    const FlowField flow = motion_vector(*state.last_kf->features, *frame.features);
    d.mean_flow_px = flow.mean_norm * 8.0;
    d.low_texture = flow.low_texture;

    const int interval = frame.index - state.last_kf->index;
    if (flow.low_texture) {
        d.keyframe = true;
        d.reason = "low_texture";
    } else if (d.mean_flow_px > cfg.motion_threshold) {
        d.keyframe = true;
        d.reason = "motion";
    } else if (interval >= cfg.max_frame_interval) {
        d.keyframe = true;
        d.reason = "interval";
    } else {
        d.reason = "static";
    }

    if (d.keyframe) {
        if (state.prev_kf) {
            // constant velocity: T_pred = (T_last * T_prev^-1) * T_last
            const Pose delta = state.last_kf->pose.compose(state.prev_kf->pose.inverse());
            d.predicted_pose = delta.compose(state.last_kf->pose);
            // this composition feeds back into itself frame over frame
            d.predicted_pose.rotation = orthonormalize_rotation(d.predicted_pose.rotation);
        } else {
            d.predicted_pose = state.last_kf->pose;
        }
    }
    return d;
}

} // namespace splat
