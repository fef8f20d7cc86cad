#include "splat/kf/window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace splat {

namespace {

struct SetCounts {
    std::size_t inter = 0, uni = 0;
};

SetCounts intersect_union(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    SetCounts s;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++s.inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    s.uni = a.size() + b.size() - s.inter;
    return s;
}

} // namespace

double relative_complement(std::span<const std::uint32_t> gi, std::span<const std::uint32_t> gj) {
    const SetCounts s = intersect_union(gi, gj);
    if (s.uni == 0) return 0.0;
    return static_cast<double>(gi.size() - s.inter) / static_cast<double>(s.uni);
}

double overlap_coefficient(std::span<const std::uint32_t> gi, std::span<const std::uint32_t> gj) {
    if (gi.empty() || gj.empty()) return 0.0;
    const SetCounts s = intersect_union(gi, gj);
    return static_cast<double>(s.inter) / static_cast<double>(std::min(gi.size(), gj.size()));
}

WindowUpdate KeyframeWindow::update(const FramePtr& kf, const WindowConfig& cfg) {
    WindowUpdate res;

    if (total_admitted_ < 2) {
        res.admitted = true;
        res.reason = "bootstrap";
        if (last_admitted_) res.rc = relative_complement(kf->visible_ids, last_admitted_->visible_ids);
    } else {
        res.rc = relative_complement(kf->visible_ids, last_admitted_->visible_ids);
        const int distance = kf->index - last_admitted_->index;
        if (res.rc > cfg.info_threshold) {
            res.admitted = true;
            res.reason = "information";
        } else if (distance >= cfg.min_mapping_distance) {
            res.admitted = true;
            res.reason = "distance";
        } else {
            res.reason = "redundant";
            return res;
        }
    }

    if (static_cast<int>(members_.size()) >= cfg.window_capacity) {
        // evict: oldest low-overlap member if any, else the member closest to
        // its predecessor (window head exempt); ties drop the older frame
        int victim = -1;
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (overlap_coefficient(members_[i]->visible_ids, kf->visible_ids) <
                cfg.oc_removal_threshold) {
                victim = static_cast<int>(i);
                break;
            }
        }
        if (victim < 0) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < members_.size(); ++i) {
                const double disp =
                    (members_[i]->pose.translation - members_[i - 1]->pose.translation).norm();
                if (disp < best) {
                    best = disp;
                    victim = static_cast<int>(i);
                }
            }
            if (victim < 0) victim = 0; // single-member window, nothing else to pick
        }
        res.evicted_frame = members_[victim]->index;
        members_.erase(members_.begin() + victim);
    }

    members_.push_back(kf);
    last_admitted_ = kf;
    ++total_admitted_;
    return res;
}

} // namespace splat
