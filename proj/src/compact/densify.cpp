#include "splat/compact/densify.hpp"

#include <cmath>
#include <stdexcept>

#include "splat/compact/mask.hpp"
#include "splat/scene/gaussian.hpp"
#include "splat/scene/projection.hpp"

namespace splat {

namespace {

// Sample from N(0, Sigma) via the factored form R * diag(s) * z.
Eigen::Vector3d covariance_sample(const Gaussian& g, Rng& rng) {
    Eigen::Vector4d q = g.rotation;
    const double n = q.norm();
    if (n < 1e-12)
        q << 1, 0, 0, 0;
    else
        q /= n;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    Eigen::Vector3d zs;
    for (int c = 0; c < 3; ++c) zs[c] = rng.normal() * std::exp(g.log_scale[c]);
    return R * zs;
}

} // namespace

DensifyReport densify_and_prune(GaussianMap& map, std::span<const double> grad_norm_avg,
                                const DensifyConfig& cfg, Rng& rng) {
    DensifyReport rep;
    rep.before = map.size();
    const int n0 = map.size();

    std::vector<char> keep(n0, 1);

    if (cfg.densify && !grad_norm_avg.empty()) {
        for (int i = 0; i < n0 && i < static_cast<int>(grad_norm_avg.size()); ++i) {
            if (grad_norm_avg[i] <= cfg.grad_threshold) continue;
            const Gaussian g = map.get(i);
            const double max_scale = std::exp(g.log_scale.maxCoeff());
            if (max_scale < cfg.small_scale) {
                map.add(g);
                ++rep.cloned;
            } else {
                Gaussian child = g;
                child.log_scale.array() -= std::log(cfg.split_shrink);
                for (int k = 0; k < 2; ++k) {
                    child.position = g.position + covariance_sample(g, rng);
                    map.add(child);
                }
                keep[i] = 0; // parent replaced by its children
                ++rep.split;
            }
        }
    }

    keep.resize(map.size(), 1);
    for (int i = 0; i < map.size(); ++i) {
        if (!keep[i]) continue; // already removed as a split parent
        if (sigmoid(map.opacity_logit(i)) < cfg.opacity_prune) {
            keep[i] = 0;
            ++rep.pruned_opacity;
            continue;
        }
        if (!map.masks_discarded() &&
            mask_value(map.mask_logit(i), cfg.mask_epsilon).forward == 0.0) {
            keep[i] = 0;
            ++rep.pruned_mask;
        }
    }

    map.compact(keep);
    rep.after = map.size();
    return rep;
}

void discard_masks(GaussianMap& map, double mask_epsilon) {
    if (map.masks_discarded()) return;
    for (int i = 0; i < map.size(); ++i)
        if (mask_value(map.mask_logit(i), mask_epsilon).forward == 0.0)
            throw std::logic_error("discard_masks: forward-0 mask remains, prune first");
    map.set_masks_discarded();
}

} // namespace splat
