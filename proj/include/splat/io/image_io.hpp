#pragma once

#include <cstdint>
#include <string>

#include "splat/core/grid.hpp"

namespace splat {

// 8-bit RGB PNG -> H x W x 3 in [0,1]. Grayscale/palette/alpha inputs are
// expanded to RGB.
ImageD read_png_rgb(const std::string& path);

// [0,1] image (values clamped) -> 8-bit RGB PNG.
void write_png_rgb(const std::string& path, const ImageD& img);

// 16-bit grayscale PNG, raw values (TUM depth convention).
Grid<std::uint16_t> read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const Grid<std::uint16_t>& img);

} // namespace splat
