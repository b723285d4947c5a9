#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "apap/correspondence.hpp"
#include "apap/types.hpp"

namespace apap {

/// 3x3 projective transform in canonical scale: the largest-magnitude entry is +1.
class Homography {
 public:
  Homography() : H_(Mat3::Identity()) {}
  /// Canonicalizes `m`; throws DegenerateError for the zero matrix.
  explicit Homography(const Mat3& m);

  static Homography identity() { return Homography(); }
  static Homography translation(double tx, double ty);

  const Mat3& matrix() const { return H_; }
  double operator()(int r, int c) const { return H_(r, c); }
  /// Throws DegenerateError when singular.
  Homography inverse() const;

 private:
  Mat3 H_;
};

/// Scales a matrix so its largest-magnitude entry is +1.
Mat3 canonicalize(const Mat3& m);

/// Similarity x -> scale * (x - centroid), as used for Hartley conditioning.
struct Similarity {
  double scale = 1.0;
  Vec2 centroid = Vec2::Zero();

  Vec2 apply(const Vec2& p) const { return scale * (p - centroid); }
  Vec3 apply_h(const Vec2& p) const { return {scale * (p.x() - centroid.x()), scale * (p.y() - centroid.y()), 1.0}; }
  Mat3 matrix() const;
  Mat3 inverse_matrix() const;
};

/// Conditioning transforms for both frames of a correspondence problem.
struct Conditioning {
  Similarity src;
  Similarity dst;
};

/// Two rows of the linearized homography constraint, with h the row-major
/// stacking of H's rows:
///   [ 0   -x~^T   q' x~^T ]
///   [ x~^T  0    -p' x~^T ]
Mat29 monomial_rows(const Correspondence& c);
Mat29 monomial_rows(const Vec2& x, const Vec2& xp);

/// Centroid to the origin, mean distance sqrt(2). Throws DegenerateError when
/// all points coincide.
std::pair<std::vector<Vec2>, Similarity> condition_points(std::span<const Vec2> points);

/// Plain DLT on conditioned points. Throws InvalidInput below four matches and
/// DegenerateError when the system is rank deficient.
Homography dlt_homography(std::span<const Correspondence> matches);

/// Throws InfinityError when |h3^T x~| < 1e-12.
Vec2 apply_homography(const Homography& H, const Vec2& x);
Vec2 apply_homography(const Mat3& H, const Vec2& x);

struct RansacResult {
  Homography H;
  CorrespondenceSet inliers;
  std::vector<std::size_t> inlier_indices;
};

/// Four-point RANSAC on target-frame transfer error, refit on all inliers.
/// Deterministic for a fixed seed.
RansacResult ransac_homography(std::span<const Correspondence> matches,
                               double inlier_threshold, int max_iters, std::uint64_t seed);

}  // namespace apap
