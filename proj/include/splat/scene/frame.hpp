#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "splat/core/grid.hpp"
#include "splat/lie/se3.hpp"

namespace splat {

struct FeatureMap; // kf/features.hpp

// One input frame plus everything the pipeline attaches to it over time.
struct Frame {
    int index = 0;
    double timestamp = 0.0;
    ImageD rgb;   // H x W x 3 in [0,1]
    ImageD depth; // H x W meters, 0 = invalid; empty when absent
    Pose pose;    // camera-from-world, estimated
    std::shared_ptr<const FeatureMap> features;
    std::vector<std::uint32_t> visible_ids; // sorted splat ids seen from pose
    bool tracking_lost = false;

    bool has_depth() const { return !depth.empty(); }
};

using FramePtr = std::shared_ptr<Frame>;

} // namespace splat
