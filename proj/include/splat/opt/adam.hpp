#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "splat/scene/gaussian_map.hpp"
#include "splat/simd/kernels.hpp"

namespace splat {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// Advances st.t and applies one step to the whole block.
inline void adam_step(AdamMoments& st, std::span<double> params, std::span<const double> grads,
                      double lr) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    ++st.t;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(st.t));
    simd::adam_update(params.data(), grads.data(), st.m.data(), st.v.data(), params.size(), lr,
                      kAdamBeta1, kAdamBeta2, kAdamEps, bc1, bc2);
}

// Variant with per-element learning rates scaled by a common factor; used for
// the pose tangent where rotation and translation get different rates.
inline void adam_step_mixed(AdamMoments& st, std::span<double> params,
                            std::span<const double> grads, std::span<const double> lrs) {
    if (params.size() != grads.size() || params.size() != st.m.size() ||
        params.size() != lrs.size())
        throw std::invalid_argument("adam_step_mixed: size mismatch");
    ++st.t;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.size(); ++i)
        simd::scalar::adam_update(&params[i], &grads[i], &st.m[i], &st.v[i], 1, lrs[i], kAdamBeta1,
                                  kAdamBeta2, kAdamEps, bc1, bc2);
}

} // namespace splat
