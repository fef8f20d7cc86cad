#include "splat/kf/correlation.hpp"

#include <cmath>
#include <stdexcept>

#include "splat/simd/kernels.hpp"

namespace splat {

CorrVolume correlation(const FeatureMap& fi, const FeatureMap& fj) {
    if (fi.rows != fj.rows || fi.cols != fj.cols)
        throw std::invalid_argument("correlation: feature grids differ in size");
    CorrVolume out;
    out.h1 = fi.rows;
    out.w1 = fi.cols;
    out.h2 = fj.rows;
    out.w2 = fj.cols;
    out.v.resize(static_cast<std::size_t>(out.h1) * out.w1 * out.h2 * out.w2);

    std::size_t idx = 0;
    for (int u1 = 0; u1 < out.h1; ++u1)
        for (int v1 = 0; v1 < out.w1; ++v1) {
            const float* a = fi.at(u1, v1);
            for (int u2 = 0; u2 < out.h2; ++u2)
                for (int v2 = 0; v2 < out.w2; ++v2)
                    out.v[idx++] = simd::dot_f32(a, fj.at(u2, v2), FeatureMap::kDim);
        }
    return out;
}

CorrelationPyramid build_pyramid(CorrVolume level0) {
    CorrelationPyramid pyr;
    pyr.levels[0] = std::move(level0);
    for (int k = 1; k < 4; ++k) {
        const CorrVolume& src = pyr.levels[k - 1];
        CorrVolume dst;
        dst.h1 = src.h1;
        dst.w1 = src.w1;
        dst.h2 = (src.h2 + 1) / 2;
        dst.w2 = (src.w2 + 1) / 2;
        dst.v.resize(static_cast<std::size_t>(dst.h1) * dst.w1 * dst.h2 * dst.w2);
        for (int u1 = 0; u1 < dst.h1; ++u1)
            for (int v1 = 0; v1 < dst.w1; ++v1)
                for (int p = 0; p < dst.h2; ++p)
                    for (int q = 0; q < dst.w2; ++q) {
                        float acc = 0.f;
                        int count = 0;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const int u2 = 2 * p + dy, v2 = 2 * q + dx;
                                if (u2 >= src.h2 || v2 >= src.w2) continue;
                                acc += src.at(u1, v1, u2, v2);
                                ++count;
                            }
                        dst.at(u1, v1, p, q) = acc / count;
                    }
        pyr.levels[k] = std::move(dst);
    }
    return pyr;
}

namespace {

// bilinear sample of one (h2, w2) slice, zero outside
float sample_slice(const CorrVolume& vol, int u1, int v1, double y, double x) {
    const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0, fx = x - x0;
    float acc = 0.f;
    for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
            const int yy = y0 + dy, xx = x0 + dx;
            if (yy < 0 || yy >= vol.h2 || xx < 0 || xx >= vol.w2) continue;
            const double wgt = (dy ? fy : 1.0 - fy) * (dx ? fx : 1.0 - fx);
            acc += static_cast<float>(wgt) * vol.at(u1, v1, yy, xx);
        }
    }
    return acc;
}

} // namespace

Grid<float> pyramid_lookup(const CorrelationPyramid& pyr, const Grid<double>& coords, int radius) {
    const CorrVolume& l0 = pyr.levels[0];
    if (coords.height() != l0.h1 || coords.width() != l0.w1 || coords.channels() != 2)
        throw std::invalid_argument("pyramid_lookup: coords must be h1 x w1 x 2");

    const int side = 2 * radius + 1;
    const int per_level = side * side;
    Grid<float> out(l0.h1, l0.w1, 4 * per_level);

    for (int u1 = 0; u1 < l0.h1; ++u1) {
        for (int v1 = 0; v1 < l0.w1; ++v1) {
            const double cx = coords.at(u1, v1, 0);
            const double cy = coords.at(u1, v1, 1);
            if (!std::isfinite(cx) || !std::isfinite(cy))
                throw std::invalid_argument("pyramid_lookup: non-finite coords");
            for (int k = 0; k < 4; ++k) {
                const double scale = 1.0 / (1 << k);
                int slot = k * per_level;
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx)
                        out.at(u1, v1, slot++) =
                            sample_slice(pyr.levels[k], u1, v1, cy * scale + dy, cx * scale + dx);
            }
        }
    }
    return out;
}

} // namespace splat
