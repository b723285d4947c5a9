#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "apap/correspondence.hpp"
#include "apap/geometry.hpp"
#include "apap/types.hpp"

namespace apap {

struct WarpConfig {
  double sigma = 8.0;     ///< Gaussian bandwidth of the moving weights, pixels.
  double gamma = 0.01;    ///< Weight floor, keeps far-field solves well posed.
  int cell_size = 8;      ///< Grid cell edge for cached evaluation, pixels.

  /// Throws InvalidInput when sigma <= 0, gamma outside [0, 1) or cell_size < 1.
  void validate() const;
};

/// One moving-DLT solution: unit 9-vector in the conditioned frame, its
/// eigenvalue, and the de-conditioned matrix.
struct LocalHomography {
  Vec9 h = Vec9::Zero();
  double lambda = 0.0;
  Mat3 H = Mat3::Identity();
};

/// Frozen estimator state for an as-projective-as-possible warp.
class ApapWarp {
 public:
  /// Throws InvalidInput below four matches.
  ApapWarp(CorrespondenceSet matches, WarpConfig cfg = {});

  const CorrespondenceSet& matches() const { return matches_; }
  const WarpConfig& config() const { return cfg_; }
  const Conditioning& conditioning() const { return cond_; }
  std::size_t size() const { return matches_.size(); }

  /// Stacked 2N x 9 monomial matrix on conditioned coordinates.
  const Eigen::Matrix<double, Eigen::Dynamic, 9>& monomials() const { return M_; }
  /// m_i^T m_i for match i.
  const Mat9& product(std::size_t i) const { return products_[i]; }
  /// Sum of all m_i^T m_i.
  const Mat9& product_sum() const { return product_sum_; }

  /// T_dst^-1 * Hc * T_src.
  Mat3 decondition(const Mat3& Hc) const;

  /// f(x_i) for every match; empty entries where the local solve was degenerate.
  const std::vector<std::optional<Vec2>>& mapped_matches() const { return mapped_; }
  /// H(x_i) for every match, same convention.
  const std::vector<std::optional<Mat3>>& match_homographies() const { return local_at_match_; }

 private:
  CorrespondenceSet matches_;
  WarpConfig cfg_;
  Conditioning cond_;
  Eigen::Matrix<double, Eigen::Dynamic, 9> M_;
  std::vector<Mat9> products_;
  Mat9 product_sum_ = Mat9::Zero();
  std::vector<std::optional<Vec2>> mapped_;
  std::vector<std::optional<Mat3>> local_at_match_;
};

/// w_i(x) = max(exp(-|x - x_i|^2 / 2 sigma^2), gamma), on raw pixel coordinates.
std::vector<double> weights(const ApapWarp& warp, const Vec2& x);
double weight(const WarpConfig& cfg, const Vec2& x, const Vec2& xi);

/// S = sum_i w_i^2 m_i^T m_i, i.e. [W M]^T [W M].
Mat9 normal_matrix(const ApapWarp& warp, std::span<const double> w);

/// Same matrix for the weights at x, accumulated as
/// gamma^2 * sum(P_i) + sum over w_i > gamma of (w_i^2 - gamma^2) P_i.
Mat9 normal_matrix(const ApapWarp& warp, const Vec2& x);

/// Least-significant eigenvector of S, sign-canonicalized and de-conditioned.
/// Throws DegenerateError when the two smallest eigenvalues differ by less
/// than 1e-12 * trace(S).
LocalHomography solve_normal_matrix(const ApapWarp& warp, const Mat9& S);

LocalHomography solve_local_homography(const ApapWarp& warp, const Vec2& x);

/// f(x) = H(x) applied to x.
Vec2 apap_eval(const ApapWarp& warp, const Vec2& x);

/// Per-cell local homographies over a source-frame rectangle. Cells are
/// cell_size x cell_size pixel blocks; each is solved at its center pixel
/// position (x0 + i * cell + (cell - 1) / 2).
class CachedWarp {
 public:
  struct Cell {
    LocalHomography local;
    Mat3 inverse;  ///< H^-1 de-conditioned, canonical scale.
  };

  CachedWarp(Rect domain, int cell_size, int cols, int rows, std::vector<std::optional<Cell>> cells)
      : domain_(domain), cell_size_(cell_size), cols_(cols), rows_(rows), cells_(std::move(cells)) {}

  const Rect& domain() const { return domain_; }
  int cell_size() const { return cell_size_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }

  /// Cell indices containing x, clamped to the grid.
  Pixel cell_index(const Vec2& x) const;
  Vec2 cell_center(int col, int row) const;
  const std::optional<Cell>& cell(int col, int row) const {
    return cells_[static_cast<std::size_t>(row) * cols_ + col];
  }
  const std::optional<Cell>& cell_at(const Vec2& x) const {
    const Pixel c = cell_index(x);
    return cell(c.x, c.y);
  }

 private:
  Rect domain_;
  int cell_size_;
  int cols_;
  int rows_;
  std::vector<std::optional<Cell>> cells_;
};

/// Solves every cell of `canvas` (source frame). Degenerate cells are left empty.
CachedWarp apap_eval_grid(const ApapWarp& warp, const Rect& canvas);

/// Cached evaluation using the containing cell's homography. Throws
/// DegenerateError for an invalid cell.
Vec2 apap_eval(const CachedWarp& grid, const Vec2& x);

/// Nearest-neighbour inverse: picks the match whose image f(x_i) is closest
/// to xp and applies that match's H(x_i)^-1.
Vec2 apap_inverse(const ApapWarp& warp, const Vec2& xp);

}  // namespace apap
