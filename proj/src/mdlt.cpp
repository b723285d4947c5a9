#include "apap/mdlt.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>

#include "apap/error.hpp"

namespace apap {

void WarpConfig::validate() const {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("gamma must lie in [0, 1)");
  if (cell_size < 1) throw InvalidInput("cell_size must be at least 1");
}

ApapWarp::ApapWarp(CorrespondenceSet matches, WarpConfig cfg)
    : matches_(std::move(matches)), cfg_(cfg) {
  cfg_.validate();
  const std::size_t n = matches_.size();
  if (n < 4) throw InvalidInput("APAP warp needs at least 4 matches");

  std::vector<Vec2> src, dst;
  src.reserve(n);
  dst.reserve(n);
  for (const auto& c : matches_) {
    src.push_back(c.x);
    dst.push_back(c.xp);
  }
  auto [src_c, Ts] = condition_points(src);
  auto [dst_c, Td] = condition_points(dst);
  cond_ = {Ts, Td};

  M_.resize(static_cast<Eigen::Index>(2 * n), 9);
  products_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat29 m = monomial_rows(src_c[i], dst_c[i]);
    M_.middleRows<2>(static_cast<Eigen::Index>(2 * i)) = m;
    products_[i].noalias() = m.transpose() * m;
    product_sum_ += products_[i];
  }

  mapped_.resize(n);
  local_at_match_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const LocalHomography lh = solve_local_homography(*this, matches_[i].x);
      mapped_[i] = apply_homography(lh.H, matches_[i].x);
      local_at_match_[i] = lh.H;
    } catch (const Error&) {
      // Left empty; apap_inverse skips these.
    }
  }
}

Mat3 ApapWarp::decondition(const Mat3& Hc) const {
  return cond_.dst.inverse_matrix() * Hc * cond_.src.matrix();
}

double weight(const WarpConfig& cfg, const Vec2& x, const Vec2& xi) {
  const double d2 = (x - xi).squaredNorm();
  return std::max(std::exp(-d2 / (2.0 * cfg.sigma * cfg.sigma)), cfg.gamma);
}

std::vector<double> weights(const ApapWarp& warp, const Vec2& x) {
  std::vector<double> w;
  w.reserve(warp.size());
  for (const auto& c : warp.matches()) w.push_back(weight(warp.config(), x, c.x));
  return w;
}

Mat9 normal_matrix(const ApapWarp& warp, std::span<const double> w) {
  if (w.size() != warp.size()) throw InvalidInput("normal_matrix: weight count mismatch");
  Mat9 S = Mat9::Zero();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double w2 = w[i] * w[i];
    if (w2 == 0.0) continue;
    S.noalias() += w2 * warp.product(i);
  }
  return S;
}

Mat9 normal_matrix(const ApapWarp& warp, const Vec2& x) {
  const WarpConfig& cfg = warp.config();
  const double g2 = cfg.gamma * cfg.gamma;
  const double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  Mat9 S = g2 * warp.product_sum();
  const auto items = warp.matches().items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double w = std::exp(-(x - items[i].x).squaredNorm() * inv);
    if (w <= cfg.gamma) continue;
    S.noalias() += (w * w - g2) * warp.product(i);
  }
  return S;
}

LocalHomography solve_normal_matrix(const ApapWarp& warp, const Mat9& S) {
  const double trace = S.trace();
  if (!(trace > 0.0) || !S.allFinite()) throw DegenerateError("local solve: empty weighted system");
  Eigen::SelfAdjointEigenSolver<Mat9> eig(S);
  const auto& ev = eig.eigenvalues();
  if (ev(1) - ev(0) < 1e-12 * trace)
    throw DegenerateError("local solve: smallest eigenvalue is not isolated");

  LocalHomography out;
  out.h = eig.eigenvectors().col(0);
  Eigen::Index peak = 0;
  out.h.cwiseAbs().maxCoeff(&peak);
  if (out.h(peak) < 0.0) out.h = -out.h;
  out.lambda = ev(0);
  Mat3 Hc;
  Hc << out.h(0), out.h(1), out.h(2), out.h(3), out.h(4), out.h(5), out.h(6), out.h(7), out.h(8);
  out.H = canonicalize(warp.decondition(Hc));
  return out;
}

LocalHomography solve_local_homography(const ApapWarp& warp, const Vec2& x) {
  return solve_normal_matrix(warp, normal_matrix(warp, x));
}

Vec2 apap_eval(const ApapWarp& warp, const Vec2& x) {
  return apply_homography(solve_local_homography(warp, x).H, x);
}

Pixel CachedWarp::cell_index(const Vec2& x) const {
  // Pixel k covers [k - 0.5, k + 0.5).
  int col = static_cast<int>(std::floor((x.x() - domain_.x + 0.5) / cell_size_));
  int row = static_cast<int>(std::floor((x.y() - domain_.y + 0.5) / cell_size_));
  col = std::clamp(col, 0, cols_ - 1);
  row = std::clamp(row, 0, rows_ - 1);
  return {col, row};
}

Vec2 CachedWarp::cell_center(int col, int row) const {
  const double half = (cell_size_ - 1) / 2.0;
  return {domain_.x + col * cell_size_ + half, domain_.y + row * cell_size_ + half};
}

CachedWarp apap_eval_grid(const ApapWarp& warp, const Rect& canvas) {
  if (canvas.empty()) throw InvalidInput("apap_eval_grid: empty canvas");
  const int cs = warp.config().cell_size;
  const int cols = (canvas.width + cs - 1) / cs;
  const int rows = (canvas.height + cs - 1) / cs;
  std::vector<std::optional<CachedWarp::Cell>> cells(static_cast<std::size_t>(cols) * rows);
  CachedWarp shape(canvas, cs, cols, rows, {});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      try {
        const LocalHomography lh = solve_local_homography(warp, shape.cell_center(c, r));
        if (std::abs(lh.H.determinant()) < 1e-300) continue;
        cells[static_cast<std::size_t>(r) * cols + c] =
            CachedWarp::Cell{lh, canonicalize(lh.H.inverse())};
      } catch (const Error&) {
        // Invalid cell.
      }
    }
  }
  return CachedWarp(canvas, cs, cols, rows, std::move(cells));
}

Vec2 apap_eval(const CachedWarp& grid, const Vec2& x) {
  const auto& cell = grid.cell_at(x);
  if (!cell) throw DegenerateError("cached warp: invalid cell");
  return apply_homography(cell->local.H, x);
}

Vec2 apap_inverse(const ApapWarp& warp, const Vec2& xp) {
  const auto& mapped = warp.mapped_matches();
  std::size_t best = mapped.size();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    if (!mapped[i]) continue;
    const double d2 = (*mapped[i] - xp).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (best == mapped.size()) throw DegenerateError("apap_inverse: no valid match homography");
  const Mat3& H = *warp.match_homographies()[best];
  const double det = H.determinant();
  if (!(std::abs(det) > 1e-12)) throw DegenerateError("apap_inverse: singular local homography");
  return apply_homography(Mat3(H.inverse()), xp);
}

}  // namespace apap
