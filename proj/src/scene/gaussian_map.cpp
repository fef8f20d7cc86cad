#include "splat/scene/gaussian_map.hpp"

#include <stdexcept>

namespace splat {

namespace {

void compact_block(std::vector<double>& buf, const std::vector<char>& keep, int stride) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) continue;
        for (int c = 0; c < stride; ++c) buf[w * stride + c] = buf[i * stride + c];
        ++w;
    }
    buf.resize(w * stride);
}

void compact_moments(AdamMoments& am, const std::vector<char>& keep, int stride) {
    compact_block(am.m, keep, stride);
    compact_block(am.v, keep, stride);
}

} // namespace

void MapGradients::add(const MapGradients& o) {
    auto axpy = [](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    axpy(position, o.position);
    axpy(rotation, o.rotation);
    axpy(log_scale, o.log_scale);
    axpy(opacity, o.opacity);
    axpy(color, o.color);
    axpy(mask, o.mask);
}

void MapGradients::scale(double s) {
    for (auto* buf : {&position, &rotation, &log_scale, &opacity, &color, &mask})
        for (double& x : *buf) x *= s;
}

std::uint32_t GaussianMap::add(const Gaussian& g) {
    for (int c = 0; c < 3; ++c) position_.push_back(g.position[c]);
    for (int c = 0; c < 4; ++c) rotation_.push_back(g.rotation[c]);
    for (int c = 0; c < 3; ++c) log_scale_.push_back(g.log_scale[c]);
    opacity_logit_.push_back(g.opacity_logit);
    for (int c = 0; c < 3; ++c) color_.push_back(g.color[c]);
    mask_logit_.push_back(g.mask_logit);
    ids_.push_back(next_id_);

    // new rows start with zero moments
    const std::size_t n = opacity_logit_.size();
    opt_.position.resize(3 * n);
    opt_.rotation.resize(4 * n);
    opt_.log_scale.resize(3 * n);
    opt_.opacity.resize(n);
    opt_.color.resize(3 * n);
    opt_.mask.resize(n);
    return next_id_++;
}

Gaussian GaussianMap::get(int i) const {
    Gaussian g;
    g.position = position(i);
    g.rotation = rotation_q(i);
    g.log_scale = log_scale(i);
    g.opacity_logit = opacity_logit_[i];
    g.color = color(i);
    g.mask_logit = mask_logit_[i];
    return g;
}

void GaussianMap::set(int i, const Gaussian& g) {
    for (int c = 0; c < 3; ++c) position_[3 * i + c] = g.position[c];
    for (int c = 0; c < 4; ++c) rotation_[4 * i + c] = g.rotation[c];
    for (int c = 0; c < 3; ++c) log_scale_[3 * i + c] = g.log_scale[c];
    opacity_logit_[i] = g.opacity_logit;
    for (int c = 0; c < 3; ++c) color_[3 * i + c] = g.color[c];
    mask_logit_[i] = g.mask_logit;
}

void GaussianMap::compact(const std::vector<char>& keep) {
    if (keep.size() != opacity_logit_.size())
        throw std::invalid_argument("GaussianMap::compact: keep size mismatch");
    compact_block(position_, keep, 3);
    compact_block(rotation_, keep, 4);
    compact_block(log_scale_, keep, 3);
    compact_block(opacity_logit_, keep, 1);
    compact_block(color_, keep, 3);
    compact_block(mask_logit_, keep, 1);
    compact_moments(opt_.position, keep, 3);
    compact_moments(opt_.rotation, keep, 4);
    compact_moments(opt_.log_scale, keep, 3);
    compact_moments(opt_.opacity, keep, 1);
    compact_moments(opt_.color, keep, 3);
    compact_moments(opt_.mask, keep, 1);

    std::size_t w = 0;
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (keep[i]) ids_[w++] = ids_[i];
    ids_.resize(w);
}

void GaussianMap::renormalize_quaternions() {
    for (int i = 0; i < size(); ++i) {
        Eigen::Map<Eigen::Vector4d> q(&rotation_[4 * i]);
        double n = q.norm();
        if (n < 1e-12) {
            q << 1.0, 0.0, 0.0, 0.0;
        } else {
            q /= n;
        }
    }
}

} // namespace splat
