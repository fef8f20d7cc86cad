#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splat/core/grid.hpp"
#include "splat/lie/se3.hpp"
#include "splat/scene/gaussian.hpp"

namespace splat {

struct DatasetFrame {
  double timestamp = 0.0;
  ImageD rgb;   // H x W x 3 in [0,1]
  ImageD depth; // H x W meters, 0 = invalid
  bool has_gt = false;
  Pose gt_world_from_cam;
};

struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<DatasetFrame> frames;
  int dropped_frames = 0; // color frames without a depth match
};

// TUM RGB-D layout: rgb.txt, depth.txt and optional groundtruth.txt under
// `dir`, each "timestamp value..." with '#' comments. Color, depth and ground
// truth are associated by nearest timestamp within 20 ms; color frames
// without a depth partner are dropped and counted. Depth PNGs are 16-bit,
// divided by intrinsics.depth_scale. Malformed lines raise with the file and
// line number. Intrinsics are not part of the layout, so the caller supplies
// them.
Dataset load_tum(const std::string& dir, const CameraIntrinsics& intrinsics);

// Plain-folder layout: rgb/ and depth/ with lexicographically paired PNGs,
// intrinsics.txt ("fx fy cx cy width height depth_scale") and an optional
// traj.txt of ground-truth poses in trajectory text format, one line per
// frame in order.
Dataset load_folder(const std::string& dir);

} // namespace splat
