#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "robodata/error.hpp"

// Minimal PNG I/O: 8-bit RGB frames and 16-bit grayscale depth (stored in
// millimeters), plus helpers converting to the numeric forms the geometry
// code consumes.

namespace robodata {

struct ImageRgb8 {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved rgb, row-major
};

struct ImageGray16 {
  int width = 0, height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

ImageRgb8 read_png_rgb8(const std::filesystem::path& path);
void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image);

ImageGray16 read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const ImageGray16& image);

/// (width, height) from the IHDR chunk without decoding the image.
std::pair<int, int> png_dimensions(const std::filesystem::path& path);

/// Per-channel planes scaled to [0, 1].
std::array<Eigen::MatrixXd, 3> rgb_planes(const ImageRgb8& image);

/// Millimeter depth to meters; zero stays zero (invalid.)
Eigen::MatrixXd depth_to_meters(const ImageGray16& image);

}  // namespace robodata
