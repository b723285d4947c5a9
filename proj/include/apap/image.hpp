#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "apap/types.hpp"

namespace apap {

/// Row-major intensity grid, 1 or 3 channels, values on the [0, 255] scale.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 1, double fill = 0.0);

  bool empty() const { return data.empty(); }
  Size size() const { return {width, height}; }

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Per-pixel real values over an image frame; +infinity is a legal value.
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Reads 8-bit PNG or binary PGM (P5) / PPM (P6).
Image load_image(const std::filesystem::path& path);

/// Writes PNG, or PGM/PPM when the extension is .pgm/.ppm. Values are rounded
/// and clamped to [0, 255].
void save_image(const Image& img, const std::filesystem::path& path);

/// Renders a map as an 8-bit grayscale image (clamped, +inf becomes 255).
Image map_to_image(const ScalarMap& map);

/// Luma 0.299 R + 0.587 G + 0.114 B; gray input is returned unchanged.
Image to_grayscale(const Image& img);

/// Bilinear sample of channel `c`. Empty when p lies outside
/// [0, width-1] x [0, height-1].
std::optional<double> sample_bilinear(const Image& img, const Vec2& p, int c = 0);
std::optional<double> sample_bilinear(const ScalarMap& map, const Vec2& p);

struct Gradient {
  ScalarMap gx;
  ScalarMap gy;
};

/// Central differences inside, one-sided differences on the border.
Gradient gradient(const Image& img);

/// Remaps every channel of `src` so its mean and standard deviation inside
/// `overlap` (mask > 0.5) match those of `dst`. A flat source channel only
/// gets its mean shifted. `dst` is returned unchanged.
std::pair<Image, Image> normalize_colors(const Image& src, const Image& dst,
                                         const ScalarMap& overlap);

}  // namespace apap
