#include "splat/compact/mask.hpp"

#include "splat/scene/gaussian.hpp"

namespace splat {

MaskEval mask_value(double mask_logit, double epsilon) {
    const double s = sigmoid(mask_logit);
    return {s >= epsilon ? 1.0 : 0.0, s * (1.0 - s)};
}

double masked_opacity(double opacity_logit, double mask_forward) {
    return mask_forward * sigmoid(opacity_logit);
}

// Linear scale; a zero mask collapses the splat to a point.
Eigen::Vector3d masked_scale(const Eigen::Vector3d& log_scale, double mask_forward) {
    return mask_forward * log_scale.array().exp().matrix();
}

} // namespace splat
