#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "splat/kf/motion.hpp"
#include "splat/scene/frame.hpp"

namespace splat {

// |G_i \ G_j| / |G_i u G_j|; empty union -> 0. Inputs are sorted id sets.
double relative_complement(std::span<const std::uint32_t> gi, std::span<const std::uint32_t> gj);

// |G_i n G_j| / min(|G_i|, |G_j|); either empty -> 0.
double overlap_coefficient(std::span<const std::uint32_t> gi, std::span<const std::uint32_t> gj);

struct WindowUpdate {
    bool admitted = false;
    std::optional<int> evicted_frame; // frame index of the dropped member
    double rc = 0.0;                  // RC(new, last admitted)
    const char* reason = "";
};

// Sliding window of information keyframes. Admission compares against the
// most recently admitted keyframe (which may itself have been evicted since).
class KeyframeWindow {
public:
    WindowUpdate update(const FramePtr& kf, const WindowConfig& cfg);

    const std::vector<FramePtr>& members() const { return members_; }
    int total_admitted() const { return total_admitted_; }
    const FramePtr& last_admitted() const { return last_admitted_; }

private:
    std::vector<FramePtr> members_; // frame-index order (admission order)
    FramePtr last_admitted_;
    int total_admitted_ = 0;
};

} // namespace splat
