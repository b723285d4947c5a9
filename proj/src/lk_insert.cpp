#include "apap/lk_insert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <optional>

#include "apap/error.hpp"
#include "apap/geometry.hpp"

namespace apap {

void SearchConfig::validate() const {
  if (window < 5 || window % 2 == 0) throw InvalidInput("window must be odd and at least 5");
  if (max_iters < 1) throw InvalidInput("max_iters must be at least 1");
  if (!(step_tol > 0.0)) throw InvalidInput("step_tol must be positive");
  if (!(accept_omega > 0.0)) throw InvalidInput("accept_omega must be positive");
  if (!(damping >= 0.0)) throw InvalidInput("damping must be non-negative");
}

SearchImages::SearchImages(const Image& src, const Image& dst)
    : source(to_grayscale(src)), target(to_grayscale(dst)), target_grad(gradient(target)) {}

namespace {

Mat29 star_rows(const ApapWarp& warp, const Vec2& x_star, const Vec2& xp_star) {
  const Conditioning& c = warp.conditioning();
  return monomial_rows(c.src.apply(x_star), c.dst.apply(xp_star));
}

AugmentedSystem decompose(const ApapWarp& warp, const Mat9& base, double w_star, const Mat29& m_star) {
  AugmentedSystem sys;
  sys.w_star = w_star;
  sys.m_star = m_star;
  sys.S = base;
  sys.S.noalias() += (w_star * w_star) * (m_star.transpose() * m_star);
  const double trace = sys.S.trace();
  if (!(trace > 0.0) || !sys.S.allFinite())
    throw DegenerateError("augmented solve: empty weighted system");

  Eigen::SelfAdjointEigenSolver<Mat9> eig(sys.S);
  sys.eigenvalues = eig.eigenvalues();
  sys.eigenvectors = eig.eigenvectors();
  if (sys.eigenvalues(1) - sys.eigenvalues(0) < 1e-12 * trace)
    throw DegenerateError("augmented solve: smallest eigenvalue is not isolated");

  Eigen::Index peak = 0;
  sys.eigenvectors.col(0).cwiseAbs().maxCoeff(&peak);
  if (sys.eigenvectors(peak, 0) < 0.0) sys.eigenvectors.col(0) *= -1.0;

  sys.local.h = sys.eigenvectors.col(0);
  sys.local.lambda = sys.eigenvalues(0);
  const Vec9& h = sys.local.h;
  Mat3 Hc;
  Hc << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  sys.local.H = canonicalize(warp.decondition(Hc));
  return sys;
}

struct WindowPixel {
  Vec2 x;
  double intensity;
  Mat9 S;
  double w_star;
};

// Per-pixel systems of one search window; everything here is independent of xp_star.
class Window {
 public:
  Window(const SearchImages& images, const ApapWarp& warp, const Vec2& x_star, const SearchConfig& cfg)
      : images_(images), warp_(warp), x_star_(x_star) {
    const int r = cfg.window / 2;
    const int cx = static_cast<int>(std::lround(x_star.x()));
    const int cy = static_cast<int>(std::lround(x_star.y()));
    const Image& I = images.source;
    if (!std::isfinite(x_star.x()) || !std::isfinite(x_star.y()) || cx - r < 0 || cy - r < 0 ||
        cx + r >= I.width || cy + r >= I.height)
      throw UnreliableWindowError("search window leaves the source image");
    pixels_.reserve(static_cast<std::size_t>(cfg.window) * cfg.window);
    for (int y = cy - r; y <= cy + r; ++y) {
      for (int x = cx - r; x <= cx + r; ++x) {
        const Vec2 p(x, y);
        pixels_.push_back({p, I.at(x, y), normal_matrix(warp, p), weight(warp.config(), p, x_star)});
      }
    }
    previous_h_.assign(pixels_.size(), std::nullopt);
  }

  CostResult cost(const Vec2& xp_star) const {
    const Mat29 m = star_rows(warp_, x_star_, xp_star);
    CostResult out;
    for (const auto& px : pixels_) {
      std::optional<double> v;
      try {
        const AugmentedSystem sys = decompose(warp_, px.S, px.w_star, m);
        v = sample_bilinear(images_.target, apply_homography(sys.local.H, px.x));
      } catch (const Error&) {
      }
      if (!v) {
        ++out.skipped;
        continue;
      }
      const double d = *v - px.intensity;
      out.cost += d * d;
      ++out.used;
    }
    if (2 * out.skipped > static_cast<int>(pixels_.size()))
      throw UnreliableWindowError("more than half of the window maps outside the target");
    return out;
  }

  LkStep step(const Vec2& xp_star, const SearchConfig& cfg, double* min_alignment) {
    const Mat29 m = star_rows(warp_, x_star_, xp_star);
    Mat2 F = Mat2::Zero();
    Vec2 b = Vec2::Zero();
    int used = 0;
    for (std::size_t k = 0; k < pixels_.size(); ++k) {
      const auto& px = pixels_[k];
      try {
        AugmentedSystem sys = decompose(warp_, px.S, px.w_star, m);
        if (previous_h_[k]) {
          // Keep the stored eigenvector on the same hemisphere as last iteration.
          double dot = sys.local.h.dot(*previous_h_[k]);
          if (dot < 0.0) {
            sys.local.h = -sys.local.h;
            sys.eigenvectors.col(0) *= -1.0;
            dot = -dot;
          }
          if (min_alignment) *min_alignment = std::min(*min_alignment, dot);
        }
        previous_h_[k] = sys.local.h;

        const Vec2 f = apply_homography(sys.local.H, px.x);
        const auto v = sample_bilinear(images_.target, f);
        const auto gx = sample_bilinear(images_.target_grad.gx, f);
        const auto gy = sample_bilinear(images_.target_grad.gy, f);
        if (!v || !gx || !gy) continue;
        const Mat2 Jf = warp_jacobian(warp_, sys, px.x);
        const Eigen::RowVector2d J = Eigen::RowVector2d(*gx, *gy) * Jf;
        const double r = px.intensity - *v;
        F.noalias() += J.transpose() * J;
        b.noalias() += J.transpose() * r;
        ++used;
      } catch (const Error&) {
      }
    }
    if (used < 8) throw IllConditionedError("LK step: fewer than 8 usable window pixels");

    LkStep out;
    out.used = used;
    F.diagonal().array() += cfg.damping;
    Eigen::SelfAdjointEigenSolver<Mat2> eig(F);
    const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
    if (!(hi > 0.0)) throw IllConditionedError("LK step: Hessian is zero");
    if (!(lo > 0.0) || hi / lo > 1e8) {
      F.diagonal().array() += 1e-3 * F.trace();
      out.damped = true;
    }
    const double det = F.determinant();
    if (!(std::abs(det) > 1e-300) || !std::isfinite(det))
      throw IllConditionedError("LK step: Hessian singular after damping");
    out.F = F;
    out.delta = F.inverse() * b;
    if (!out.delta.allFinite()) throw IllConditionedError("LK step: non-finite update");
    return out;
  }

 private:
  const SearchImages& images_;
  const ApapWarp& warp_;
  Vec2 x_star_;
  std::vector<WindowPixel> pixels_;
  std::vector<std::optional<Vec9>> previous_h_;
};

}  // namespace

AugmentedSystem augmented_system(const ApapWarp& warp, std::span<const double> w, double w_star,
                                 const Vec2& x_star, const Vec2& xp_star) {
  return decompose(warp, normal_matrix(warp, w), w_star, star_rows(warp, x_star, xp_star));
}

AugmentedSystem augmented_system(const ApapWarp& warp, const Vec2& x, const Vec2& x_star,
                                 const Vec2& xp_star) {
  return decompose(warp, normal_matrix(warp, x), weight(warp.config(), x, x_star),
                   star_rows(warp, x_star, xp_star));
}

LocalHomography augmented_solve(const ApapWarp& warp, const Vec2& x, const Vec2& x_star,
                                const Vec2& xp_star) {
  return augmented_system(warp, x, x_star, xp_star).local;
}

Vec2 augmented_eval(const ApapWarp& warp, const Vec2& x, const Vec2& x_star, const Vec2& xp_star) {
  return apply_homography(augmented_solve(warp, x, x_star, xp_star).H, x);
}

Mat2 warp_jacobian(const ApapWarp& warp, const AugmentedSystem& sys, const Vec2& x) {
  const Vec9& ev = sys.eigenvalues;
  const double trace = sys.S.trace();
  if (ev(1) - ev(0) < 1e-10 * trace)
    throw IllConditionedError("warp Jacobian: eigen gap below 1e-10 * trace");

  const Vec9 h = sys.eigenvectors.col(0);
  const double w2 = sys.w_star * sys.w_star;
  const double sp = warp.conditioning().dst.scale;

  // Appended rows: r0 = [0, -x, q x], r1 = [x, 0, -p x] in the conditioned frame.
  const Eigen::Matrix<double, 1, 9> r0 = sys.m_star.row(0);
  const Eigen::Matrix<double, 1, 9> r1 = sys.m_star.row(1);
  const Eigen::RowVector3d xt = r1.head<3>();
  Eigen::Matrix<double, 1, 9> dr0 = Eigen::Matrix<double, 1, 9>::Zero();
  Eigen::Matrix<double, 1, 9> dr1 = Eigen::Matrix<double, 1, 9>::Zero();
  dr0.tail<3>() = xt;   // d r0 / d q
  dr1.tail<3>() = -xt;  // d r1 / d p
  const Mat9 dS_dp = (w2 * sp) * (dr1.transpose() * r1 + r1.transpose() * dr1);
  const Mat9 dS_dq = (w2 * sp) * (dr0.transpose() * r0 + r0.transpose() * dr0);

  double spread = 0.0;
  for (int j = 1; j < 9; ++j) spread = std::max(spread, std::abs(ev(0) - ev(j)));
  Mat9 pinv = Mat9::Zero();
  for (int j = 1; j < 9; ++j) {
    const double d = ev(0) - ev(j);
    if (std::abs(d) < 1e-10 * spread) continue;
    const Vec9 v = sys.eigenvectors.col(j);
    pinv.noalias() += (v * v.transpose()) / d;
  }
  Eigen::Matrix<double, 9, 2> dh;
  dh.col(0) = pinv * (dS_dp * h);
  dh.col(1) = pinv * (dS_dq * h);

  const Conditioning& c = warp.conditioning();
  const Vec3 xc = c.src.apply_h(x);
  Eigen::Matrix<double, 3, 9> Y = Eigen::Matrix<double, 3, 9>::Zero();
  Y.block<1, 3>(0, 0) = xc.transpose();
  Y.block<1, 3>(1, 3) = xc.transpose();
  Y.block<1, 3>(2, 6) = xc.transpose();
  const Mat3 Tinv = c.dst.inverse_matrix();
  const Vec3 z = Tinv * (Y * h);
  if (!(std::abs(z.z()) >= 1e-12)) throw InfinityError("warp Jacobian: point maps to infinity");
  Eigen::Matrix<double, 2, 3> dfdz;
  dfdz << 1.0 / z.z(), 0.0, -z.x() / (z.z() * z.z()),
          0.0, 1.0 / z.z(), -z.y() / (z.z() * z.z());
  const Eigen::Matrix<double, 2, 9> dfdh = dfdz * Tinv * Y;
  return dfdh * dh;
}

Mat2 warp_jacobian(const ApapWarp& warp, const Vec2& x, const Vec2& x_star, const Vec2& xp_star) {
  return warp_jacobian(warp, augmented_system(warp, x, x_star, xp_star), x);
}

CostResult matching_cost(const SearchImages& images, const ApapWarp& warp, const Vec2& x_star,
                         const Vec2& xp_star, const SearchConfig& cfg) {
  cfg.validate();
  return Window(images, warp, x_star, cfg).cost(xp_star);
}

LkStep lk_step(const SearchImages& images, const ApapWarp& warp, const Vec2& x_star,
               const Vec2& xp_star, const SearchConfig& cfg) {
  cfg.validate();
  Window window(images, warp, x_star, cfg);
  return window.step(xp_star, cfg, nullptr);
}

SearchResult search_correspondence(const SearchImages& images, const ApapWarp& warp,
                                   const Vec2& x_star, const SearchConfig& cfg) {
  cfg.validate();
  SearchResult res;
  res.final_cost = std::numeric_limits<double>::infinity();
  try {
    Window window(images, warp, x_star, cfg);
    Vec2 xp = apap_eval(warp, x_star);
    res.xp_star = xp;
    double cost = window.cost(xp).cost;
    res.final_cost = cost;
    res.cost_history.push_back(cost);

    for (int it = 1; it <= cfg.max_iters; ++it) {
      res.iterations = it;
      const LkStep step = window.step(xp, cfg, &res.min_sign_alignment);
      const double norm = step.delta.norm();

      bool moved = false;
      double taken = norm;
      for (int k = 0; k <= 5; ++k) {
        const double scale = std::ldexp(1.0, -k);
        const Vec2 trial = xp + scale * step.delta;
        double trial_cost;
        try {
          trial_cost = window.cost(trial).cost;
        } catch (const Error&) {
          continue;
        }
        if (trial_cost < cost) {
          xp = trial;
          cost = trial_cost;
          taken = scale * norm;
          moved = true;
          break;
        }
      }
      if (moved) {
        res.cost_history.push_back(cost);
        if (taken < cfg.step_tol) {
          res.converged = true;
          break;
        }
        continue;
      }
      // No scaled step lowers the cost: stationary once the smallest trial step is below tolerance.
      res.converged = std::ldexp(norm, -5) < cfg.step_tol;
      break;
    }
    res.xp_star = xp;
    res.final_cost = cost;
  } catch (const Error& e) {
    res.failure = e.what();
    res.converged = false;
  }
  res.accepted = res.converged && res.final_cost < cfg.accept_omega;
  return res;
}

}  // namespace apap
