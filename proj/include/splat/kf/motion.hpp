#pragma once

#include "splat/core/grid.hpp"
#include "splat/kf/features.hpp"
#include "splat/lie/se3.hpp"
#include "splat/scene/frame.hpp"

namespace splat {

struct WindowConfig {
    double motion_threshold = 2.0; // px, mean flow norm * 8
    int max_frame_interval = 15;
    double info_threshold = 0.15;      // RC(new, last info kf)
    int min_mapping_distance = 20;     // frames
    int window_capacity = 8;
    double oc_removal_threshold = 0.3;
};

struct FlowField {
    Grid<double> flow;           // h1 x w1 x 2 displacements (dx, dy) in cell units
    Grid<unsigned char> reliable; // h1 x w1
    double mean_norm = 0.0;      // cells, over reliable cells
    double reliable_fraction = 0.0;
    bool low_texture = false;    // reliable fraction < 25%
};

// Per-cell displacement: coarse peak from the level-1 correlation slice
// inside a +-8 cell search window, exact cell from level 0 within that bin,
// then quadratic sub-cell interpolation. Peak correlation < 0.3 marks the
// cell unreliable.
FlowField motion_vector(const FeatureMap& f_prev, const FeatureMap& f_cur);

struct MotionFilterState {
    FramePtr last_kf;  // most recent motion keyframe
    FramePtr prev_kf;  // one before it
};

struct MotionDecision {
    bool keyframe = false;
    double mean_flow_px = 0.0;
    bool low_texture = false;
    Pose predicted_pose; // constant-velocity initialization when accepted
    const char* reason = "";
};

// Decides whether `frame` becomes a motion keyframe. Pure in (state, frame,
// cfg); callers update state after acting on the decision. frame.features
// must be populated; the first frame is always accepted with identity pose.
MotionDecision motion_filter(const MotionFilterState& state, const Frame& frame,
                             const WindowConfig& cfg);

} // namespace splat
