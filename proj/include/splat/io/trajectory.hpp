#pragma once

#include <string>
#include <vector>

#include "splat/lie/se3.hpp"

namespace splat {

// World-from-camera pose stamped with the frame timestamp. This matches the
// on-disk text convention (timestamp tx ty tz qx qy qz qw per line), so
// export/load are direct serializations.
struct TrajectoryPoint {
  double timestamp = 0.0;
  Pose world_from_cam;
};

using Trajectory = std::vector<TrajectoryPoint>;

// One line per pose, fields space-separated, 6 decimal places.
void export_trajectory(const std::string& path, const Trajectory& traj);

// Accepts '#' comment lines; throws with a line number on malformed input.
Trajectory load_trajectory(const std::string& path);

} // namespace splat
