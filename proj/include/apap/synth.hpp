#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apap/geometry.hpp"
#include "apap/image.hpp"

namespace apap {

/// Smooth random texture: Gaussian dots on a jittered lattice over a
/// low-amplitude sum of long-wavelength cosines. Evaluated analytically, so
/// warped renders need no resampling.
class DotTexture {
 public:
  DotTexture(std::uint64_t seed, double x0, double y0, double x1, double y1);

  double operator()(double x, double y) const;

 private:
  struct Dot {
    double x, y, amplitude;
  };
  struct Wave {
    double kx, ky, phase, amplitude;
  };
  double x0_, y0_;
  int cols_, rows_;
  std::vector<Dot> dots_;  ///< One per lattice cell, row-major.
  std::vector<Wave> waves_;
};

struct TwoPlaneScene {
  Image source;
  Image target;
  Homography H1;     ///< Left plane (x < crease).
  Homography H2;     ///< Right plane.
  ScalarMap plane;   ///< Source frame: 1 or 2.
  double crease = 0.0;
  std::uint64_t seed = 0;
  double parallax = 0.0;
};

/// Source/target pair of two planes meeting at x = width / 2. H2 = H1 * G
/// where G is a shear that fixes the crease and whose largest displacement
/// over the source frame is `parallax` pixels.
TwoPlaneScene gen_two_plane_pair(int width, int height, std::uint64_t seed, double parallax);

/// H_k(x) for the plane containing x. Throws InvalidInput outside the source frame.
Vec2 ground_truth_flow(const TwoPlaneScene& scene, const Vec2& x);

/// Root-mean-square gray difference over overlap (mask > 0.5). Throws EmptyOverlapError.
double alignment_rmse(const Image& warped, const Image& target, const ScalarMap& overlap);

/// Three rows of three numbers, 9 decimals, row-major.
std::string format_homography(const Mat3& H);
Mat3 read_homography(const std::filesystem::path& path);

/// Writes source.png, target.png, plane.png, H1.txt and H2.txt into `dir`.
void export_scene(const TwoPlaneScene& scene, const std::filesystem::path& dir);

}  // namespace apap
