#pragma once

#include <cstdint>
#include <string>

#include "splat/io/config.hpp"
#include "splat/io/dataset.hpp"
#include "splat/io/trajectory.hpp"

namespace splat {

struct RunReport {
  Trajectory trajectory;     // one pose per motion keyframe, final estimates
  double ate_cm = -1.0;      // negative when ground truth is absent
  double mean_psnr = 0.0;    // over information keyframes, final map
  double mean_ssim = 0.0;
  int final_gaussians = 0;
  std::uint64_t map_bytes = 0; // size of the exported splat file
  double fps = 0.0;
  int frames_processed = 0;
  int motion_keyframes = 0;
  int info_keyframes = 0;
  int tracking_lost = 0;
  int dropped_frames = 0;
  std::string output_dir;

  std::string to_json() const;
};

// Full pipeline over a dataset already in memory. Writes trajectory.txt,
// map.ply, metrics.json and run_log.jsonl (plus per-keyframe renders when
// asked) under cfg.output. cfg.single_thread selects the serial flow, which
// is bit-reproducible for a fixed seed; otherwise tracking and mapping run
// on separate threads coupled by a bounded keyframe queue.
RunReport run_slam_on(const Dataset& dataset, const RunConfig& cfg);

// Loads the dataset named by cfg (tum | folder | synthetic) and runs.
RunReport run_slam(const RunConfig& cfg);

} // namespace splat
