#pragma once

#include <vector>

#include "splat/core/grid.hpp"

namespace splat {

// Dense descriptor grid at 1/8 image resolution. Hand-crafted 256-D
// descriptors (patch values + gradient histograms + color stats, zero-padded,
// L2-normalized) standing in for a learned feature extractor with the same
// shape contract.
struct FeatureMap {
    static constexpr int kDim = 256;

    int rows = 0, cols = 0;
    std::vector<float> data; // rows * cols * kDim

    const float* at(int r, int c) const { return &data[(static_cast<std::size_t>(r) * cols + c) * kDim]; }
    float* at(int r, int c) { return &data[(static_cast<std::size_t>(r) * cols + c) * kDim]; }
};

// rgb is H x W x 3 in [0,1], H and W at least 8. Cells are non-overlapping
// 8x8 blocks; remainder rows/columns are ignored.
FeatureMap extract_features(const ImageD& rgb);

} // namespace splat
