#pragma once

#include <cstdint>
#include <string>

#include "splat/io/synthetic.hpp"
#include "splat/kf/motion.hpp"
#include "splat/mapping/mapper.hpp"
#include "splat/render/rasterizer.hpp"
#include "splat/track/tracker.hpp"

namespace splat {

// Every knob of a run, grouped by subsystem. Parsed from a flat key = value
// file (config_keys() lists the accepted names).
struct RunConfig {
  std::string dataset;          // path; ignored for the synthetic format
  std::string format = "tum";   // tum | folder | synthetic
  std::string output = "out";
  std::uint64_t seed = 0;
  bool single_thread = false;
  bool save_renders = false;

  // Intrinsics for the tum format, which carries none on disk.
  double fx = 525.0, fy = 525.0, cx = 319.5, cy = 239.5;
  int width = 640, height = 480;
  double depth_scale = 5000.0;

  RasterConfig raster;
  WindowConfig window;
  TrackingConfig tracking;
  MappingConfig mapping;
  SyntheticSpec synth;

  CameraIntrinsics tum_intrinsics() const;
};

// Applies one key = value pair; throws std::invalid_argument on an unknown
// key or unparsable value.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// '#' comments and blank lines allowed; errors carry path:line.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");

// Accepted key names, one per line, for --help style output.
std::string config_keys();

} // namespace splat
