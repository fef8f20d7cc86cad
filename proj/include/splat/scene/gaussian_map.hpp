#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "splat/scene/gaussian.hpp"

namespace splat {

// Per-parameter-class Adam moments, kept index-congruent with the map.
struct AdamMoments {
    std::vector<double> m, v;
    long t = 0;

    void resize(std::size_t n) {
        m.resize(n, 0.0);
        v.resize(n, 0.0);
    }
};

struct MapOptState {
    AdamMoments position;  // 3N
    AdamMoments rotation;  // 4N
    AdamMoments log_scale; // 3N
    AdamMoments opacity;   // N
    AdamMoments color;     // 3N
    AdamMoments mask;      // N
};

// Flat gradient accumulator matching the map layout.
struct MapGradients {
    std::vector<double> position, rotation, log_scale, opacity, color, mask;

    void resize_zero(int n) {
        position.assign(3 * n, 0.0);
        rotation.assign(4 * n, 0.0);
        log_scale.assign(3 * n, 0.0);
        opacity.assign(n, 0.0);
        color.assign(3 * n, 0.0);
        mask.assign(n, 0.0);
    }

    void add(const MapGradients& o);
    void scale(double s);
};

// Structure-of-arrays splat storage. Stable uint32 ids survive compaction;
// indices do not. Optimizer moments stay congruent through add/remove.
class GaussianMap {
public:
    int size() const { return static_cast<int>(opacity_logit_.size()); }

    std::uint32_t add(const Gaussian& g);
    Gaussian get(int i) const;
    void set(int i, const Gaussian& g);

    // keep[i] == 0 drops splat i (and its moments).
    void compact(const std::vector<char>& keep);

    std::uint32_t id_at(int i) const { return ids_[i]; }

    double* position_data() { return position_.data(); }
    const double* position_data() const { return position_.data(); }
    double* rotation_data() { return rotation_.data(); }
    const double* rotation_data() const { return rotation_.data(); }
    double* log_scale_data() { return log_scale_.data(); }
    const double* log_scale_data() const { return log_scale_.data(); }
    double* opacity_data() { return opacity_logit_.data(); }
    const double* opacity_data() const { return opacity_logit_.data(); }
    double* color_data() { return color_.data(); }
    const double* color_data() const { return color_.data(); }
    double* mask_data() { return mask_logit_.data(); }
    const double* mask_data() const { return mask_logit_.data(); }

    Eigen::Map<const Eigen::Vector3d> position(int i) const {
        return Eigen::Map<const Eigen::Vector3d>(&position_[3 * i]);
    }
    Eigen::Map<const Eigen::Vector4d> rotation_q(int i) const {
        return Eigen::Map<const Eigen::Vector4d>(&rotation_[4 * i]);
    }
    Eigen::Map<const Eigen::Vector3d> log_scale(int i) const {
        return Eigen::Map<const Eigen::Vector3d>(&log_scale_[3 * i]);
    }
    double opacity_logit(int i) const { return opacity_logit_[i]; }
    Eigen::Map<const Eigen::Vector3d> color(int i) const {
        return Eigen::Map<const Eigen::Vector3d>(&color_[3 * i]);
    }
    double mask_logit(int i) const { return mask_logit_[i]; }

    void renormalize_quaternions();

    // After final refinement the mask channel is dropped; every splat then
    // renders with blend factor 1 regardless of its stored logit.
    bool masks_discarded() const { return masks_discarded_; }
    void set_masks_discarded() { masks_discarded_ = true; }

    MapOptState& opt() { return opt_; }
    const MapOptState& opt() const { return opt_; }

private:
    std::vector<double> position_;      // 3N
    std::vector<double> rotation_;      // 4N, wxyz
    std::vector<double> log_scale_;     // 3N
    std::vector<double> opacity_logit_; // N
    std::vector<double> color_;         // 3N
    std::vector<double> mask_logit_;    // N
    std::vector<std::uint32_t> ids_;
    std::uint32_t next_id_ = 0;
    bool masks_discarded_ = false;
    MapOptState opt_;
};

} // namespace splat
