#pragma once

#include <Eigen/Core>

namespace splat {

struct MaskEval {
    double forward;         // 0 or 1
    double gradient_factor; // sigmoid slope passed straight through
};

// Hard binarization with a straight-through gradient: forward is the
// indicator sigma(logit) >= epsilon, backward pretends forward were
// sigma(logit).
MaskEval mask_value(double mask_logit, double epsilon);

// Mask applied to the blended attributes: zero mask collapses the splat.
double masked_opacity(double opacity_logit, double mask_forward);
Eigen::Vector3d masked_scale(const Eigen::Vector3d& log_scale, double mask_forward);

} // namespace splat
