#include "splat/compact/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "splat/compact/ssim.hpp"
#include "splat/scene/gaussian.hpp"
#include "splat/simd/kernels.hpp"

namespace splat {

double photometric_ssim_loss(const ImageD& rendered, const ImageD& gt, double lambda_ssim,
                             ImageD* d_rendered) {
    if (!rendered.same_shape(gt))
        throw std::invalid_argument("photometric_ssim_loss: shape mismatch");
    const std::size_t n = rendered.size();
    const double l1 = simd::sum_abs_diff(rendered.data(), gt.data(), n) / static_cast<double>(n);

    ImageD d_ssim;
    const double s = ssim(rendered, gt, d_rendered ? &d_ssim : nullptr);

    if (d_rendered) {
        *d_rendered = ImageD(rendered.height(), rendered.width(), rendered.channels());
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = rendered.data()[i] - gt.data()[i];
            // L1 subgradient: 0 at exact equality
            const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            d_rendered->data()[i] =
                (1.0 - lambda_ssim) * sgn * inv_n - lambda_ssim * d_ssim.data()[i];
        }
    }
    return (1.0 - lambda_ssim) * l1 + lambda_ssim * (1.0 - s);
}

double mask_loss(const GaussianMap& map, std::span<double> d_mask) {
    const int n = map.size();
    if (n == 0) return 0.0;
    if (!d_mask.empty() && static_cast<int>(d_mask.size()) != n)
        throw std::invalid_argument("mask_loss: gradient span size mismatch");
    double total = 0.0;
    const double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const double s = sigmoid(map.mask_logit(i));
        total += s;
        if (!d_mask.empty()) d_mask[i] += s * (1.0 - s) * inv_n;
    }
    return total * inv_n;
}

double total_scene_loss(const ImageD& rendered, const ImageD& gt, const GaussianMap& map,
                        const LossWeights& w, ImageD* d_rendered, std::span<double> d_mask) {
    const double photo = photometric_ssim_loss(rendered, gt, w.lambda_ssim, d_rendered);

    double m = 0.0;
    if (!map.masks_discarded()) {
        if (d_mask.empty()) {
            m = mask_loss(map);
        } else {
            std::vector<double> raw(map.size(), 0.0);
            m = mask_loss(map, raw);
            for (int i = 0; i < map.size(); ++i) d_mask[i] += w.lambda_mask * raw[i];
        }
    }
    return photo + w.lambda_mask * m;
}

} // namespace splat
