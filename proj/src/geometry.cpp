#include "apap/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "apap/error.hpp"

namespace apap {

Mat3 canonicalize(const Mat3& m) {
  Eigen::Index r = 0, c = 0;
  const double peak = m.cwiseAbs().maxCoeff(&r, &c);
  if (!(peak > 0.0) || !m.allFinite()) throw DegenerateError("homography has zero or non-finite norm");
  return m / m(r, c);
}

Homography::Homography(const Mat3& m) : H_(canonicalize(m)) {}

Homography Homography::translation(double tx, double ty) {
  Mat3 m = Mat3::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::inverse() const {
  const double det = H_.determinant();
  if (!(std::abs(det) > 1e-300)) throw DegenerateError("singular homography");
  return Homography(H_.inverse());
}

Mat3 Similarity::matrix() const {
  Mat3 T = Mat3::Identity();
  T(0, 0) = scale;
  T(1, 1) = scale;
  T(0, 2) = -scale * centroid.x();
  T(1, 2) = -scale * centroid.y();
  return T;
}

Mat3 Similarity::inverse_matrix() const {
  Mat3 T = Mat3::Identity();
  T(0, 0) = 1.0 / scale;
  T(1, 1) = 1.0 / scale;
  T(0, 2) = centroid.x();
  T(1, 2) = centroid.y();
  return T;
}

Mat29 monomial_rows(const Vec2& x, const Vec2& xp) {
  const Eigen::RowVector3d xt(x.x(), x.y(), 1.0);
  Mat29 m = Mat29::Zero();
  m.block<1, 3>(0, 3) = -xt;
  m.block<1, 3>(0, 6) = xp.y() * xt;
  m.block<1, 3>(1, 0) = xt;
  m.block<1, 3>(1, 6) = -xp.x() * xt;
  return m;
}

Mat29 monomial_rows(const Correspondence& c) { return monomial_rows(c.x, c.xp); }

std::pair<std::vector<Vec2>, Similarity> condition_points(std::span<const Vec2> points) {
  if (points.empty()) throw InvalidInput("condition_points: no points");
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(points.size());
  const double extent = std::max(centroid.cwiseAbs().maxCoeff(), 1.0);
  if (!(mean_dist > 1e-12 * extent))
    throw DegenerateError("condition_points: all points coincide");

  Similarity sim{std::sqrt(2.0) / mean_dist, centroid};
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sim.apply(p));
  return {std::move(out), sim};
}

Homography dlt_homography(std::span<const Correspondence> matches) {
  if (matches.size() < 4) throw InvalidInput("dlt_homography: need at least 4 matches");
  std::vector<Vec2> src, dst;
  src.reserve(matches.size());
  dst.reserve(matches.size());
  for (const auto& c : matches) {
    src.push_back(c.x);
    dst.push_back(c.xp);
  }
  const auto [src_c, Ts] = condition_points(src);
  const auto [dst_c, Td] = condition_points(dst);

  Mat9 S = Mat9::Zero();
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const Mat29 m = monomial_rows(src_c[i], dst_c[i]);
    S.noalias() += m.transpose() * m;
  }
  Eigen::SelfAdjointEigenSolver<Mat9> eig(S);
  const double trace = S.trace();
  const auto& ev = eig.eigenvalues();
  if (!(trace > 0.0) || ev(1) - ev(0) < 1e-12 * trace)
    throw DegenerateError("dlt_homography: rank-deficient system (collinear or repeated points)");

  const Vec9 h = eig.eigenvectors().col(0);
  Mat3 Hc;
  Hc << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(Td.inverse_matrix() * Hc * Ts.matrix());
}

Vec2 apply_homography(const Mat3& H, const Vec2& x) {
  const Vec3 v = H * Vec3(x.x(), x.y(), 1.0);
  if (!(std::abs(v.z()) >= 1e-12)) throw InfinityError("point maps to infinity");
  return {v.x() / v.z(), v.y() / v.z()};
}

Vec2 apply_homography(const Homography& H, const Vec2& x) {
  return apply_homography(H.matrix(), x);
}

namespace {

double transfer_error(const Mat3& H, const Correspondence& c) {
  const Vec3 v = H * Vec3(c.x.x(), c.x.y(), 1.0);
  if (!(std::abs(v.z()) >= 1e-12)) return std::numeric_limits<double>::infinity();
  return (Vec2(v.x() / v.z(), v.y() / v.z()) - c.xp).norm();
}

}  // namespace

RansacResult ransac_homography(std::span<const Correspondence> matches,
                               double inlier_threshold, int max_iters, std::uint64_t seed) {
  const std::size_t n = matches.size();
  if (n < 4) throw InvalidInput("ransac_homography: need at least 4 matches");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> best;
  std::vector<std::size_t> current;
  std::array<std::size_t, 4> pick{};
  std::array<Correspondence, 4> sample;

  for (int it = 0; it < max_iters; ++it) {
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        pick[k] = static_cast<std::size_t>(rng() % n);
        fresh = std::find(pick.begin(), pick.begin() + k, pick[k]) == pick.begin() + k;
      } while (!fresh);
      sample[k] = matches[pick[k]];
    }
    Mat3 H;
    try {
      H = dlt_homography(sample).matrix();
    } catch (const Error&) {
      continue;
    }
    current.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (transfer_error(H, matches[i]) <= inlier_threshold) current.push_back(i);
    if (current.size() > best.size()) {
      best.swap(current);
      if (best.size() == n) break;
    }
  }
  if (best.size() < 4)
    throw DegenerateError("ransac_homography: no hypothesis with at least 4 inliers");

  RansacResult result;
  result.inlier_indices = best;
  std::vector<Correspondence> inl;
  inl.reserve(best.size());
  for (std::size_t i : best) inl.push_back(matches[i]);
  result.H = dlt_homography(inl);
  result.inliers = CorrespondenceSet::from(inl);
  return result;
}

}  // namespace apap
