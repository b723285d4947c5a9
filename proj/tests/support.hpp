#pragma once

#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "apap/correspondence.hpp"
#include "apap/geometry.hpp"
#include "apap/image.hpp"

namespace apap::test {

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (rng_() & 1u) != 0; }
  Vec2 point(double x0, double y0, double x1, double y1) { return {uniform(x0, x1), uniform(y0, y1)}; }

  /// Mild projective transform of an image-sized frame: small rotation,
  /// scale near 1, translation up to `shift` px, perspective terms ~1e-4.
  Mat3 homography(double shift = 40.0) {
    const double a = uniform(-0.15, 0.15), s = uniform(0.85, 1.15);
    Mat3 H;
    H << s * std::cos(a) + uniform(-0.05, 0.05), -s * std::sin(a) + uniform(-0.05, 0.05), uniform(-shift, shift),
        s * std::sin(a) + uniform(-0.05, 0.05), s * std::cos(a) + uniform(-0.05, 0.05), uniform(-shift, shift),
        uniform(-2e-4, 2e-4), uniform(-2e-4, 2e-4), 1.0;
    return H;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Vec2 map_point(const Mat3& H, const Vec2& x) {
  const Vec3 v = H * Vec3(x.x(), x.y(), 1.0);
  return {v.x() / v.z(), v.y() / v.z()};
}

/// n matches with random sources in the box, targets exactly H(x).
inline CorrespondenceSet exact_matches(Gen& g, const Mat3& H, int n, double w = 640.0, double h = 480.0) {
  CorrespondenceSet X(Provenance::Synthetic);
  while (static_cast<int>(X.size()) < n) {
    const Vec2 x = g.point(0.0, 0.0, w, h);
    X.try_add({x, map_point(H, x)});
  }
  return X;
}

/// Matrices equal up to scale: compare after normalizing to unit Frobenius norm and fixing sign.
inline double projective_distance(const Mat3& A, const Mat3& B) {
  Mat3 a = A / A.norm(), b = B / B.norm();
  if ((a.array() * b.array()).sum() < 0.0) b = -b;
  return (a - b).norm();
}

/// Gray image filled by f(x, y).
template <typename F>
Image render(int w, int h, F&& f) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = f(static_cast<double>(x), static_cast<double>(y));
  return img;
}

/// Uniform noise smoothed by a separable Gaussian, rescaled to [20, 235].
inline Image smooth_noise(int w, int h, std::uint64_t seed, double blur) {
  Gen g(seed);
  std::vector<double> a(static_cast<std::size_t>(w) * h);
  for (double& v : a) v = g.uniform(0.0, 1.0);
  const int r = static_cast<int>(std::ceil(3.0 * blur));
  std::vector<double> k(2 * r + 1);
  double ks = 0.0;
  for (int i = -r; i <= r; ++i) ks += k[i + r] = std::exp(-0.5 * i * i / (blur * blur));
  for (double& v : k) v /= ks;
  std::vector<double> b(a.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * a[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      b[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * b[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      a[static_cast<std::size_t>(y) * w + x] = s;
    }
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  const double l = *lo, span = *hi - *lo;
  Image img(w, h, 1);
  for (std::size_t i = 0; i < a.size(); ++i) img.data[i] = 20.0 + 215.0 * (a[i] - l) / span;
  return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("apap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace apap::test
