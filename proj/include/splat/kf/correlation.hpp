#pragma once

#include <array>
#include <vector>

#include "splat/core/grid.hpp"
#include "splat/kf/features.hpp"

namespace splat {

// All-pairs descriptor similarity volume, h1 x w1 x h2 x w2.
struct CorrVolume {
    int h1 = 0, w1 = 0, h2 = 0, w2 = 0;
    std::vector<float> v;

    float at(int u1, int v1, int u2, int v2) const {
        return v[((static_cast<std::size_t>(u1) * w1 + v1) * h2 + u2) * w2 + v2];
    }
    float& at(int u1, int v1, int u2, int v2) {
        return v[((static_cast<std::size_t>(u1) * w1 + v1) * h2 + u2) * w2 + v2];
    }
};

CorrVolume correlation(const FeatureMap& fi, const FeatureMap& fj);

// Level 0 is the full volume; each level halves the last two dims (ceil),
// averaging over the cells present (edge bins average fewer entries so the
// values stay inside [-1, 1]).
struct CorrelationPyramid {
    std::array<CorrVolume, 4> levels;
};

CorrelationPyramid build_pyramid(CorrVolume level0);

// RAFT-style lookup: for each source cell, bilinear samples of the (2r+1)^2
// neighborhood around coords/2^k in each level, concatenated. coords is
// h1 x w1 x 2 holding (x, y) target positions in level-0 cell units.
// Out-of-bounds samples are zero. Output is h1 x w1 x 4(2r+1)^2.
Grid<float> pyramid_lookup(const CorrelationPyramid& pyr, const Grid<double>& coords,
                           int radius = 3);

} // namespace splat
