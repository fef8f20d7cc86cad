#pragma once

#include <cstddef>
#include <string>

#include "splat/scene/gaussian_map.hpp"

namespace splat {

// Binary little-endian PLY with one vertex element and 14 float32 properties
// per splat, in this order:
//   x y z                  position (meters)
//   scale_0 scale_1 scale_2  log-scales
//   rot_0 rot_1 rot_2 rot_3  quaternion, w first
//   opacity                opacity logit
//   f_dc_0 f_dc_1 f_dc_2   RGB color
// Payload is exactly 14*4*count bytes after the header.
void export_ply(const std::string& path, const GaussianMap& map);

// Loads the layout above. The format carries no pruning masks, so the result
// has masks marked discarded (every splat fully active).
GaussianMap load_ply(const std::string& path);

// Header the exporter writes for a given splat count; exposed so size
// arithmetic (header + payload) can be checked against files on disk.
std::string ply_header(int count);

} // namespace splat
