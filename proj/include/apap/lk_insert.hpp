#pragma once

#include <span>
#include <string>
#include <vector>

#include "apap/image.hpp"
#include "apap/mdlt.hpp"
#include "apap/types.hpp"

namespace apap {

struct SearchConfig {
  int window = 31;              ///< Side of the square window, odd.
  int max_iters = 30;
  double step_tol = 0.01;       ///< Pixels.
  double accept_omega = 1000.0; ///< Acceptance bound on the window cost.
  double damping = 0.0;         ///< Added to the Hessian diagonal before every solve.

  /// Throws InvalidInput for an even or < 5 window, max_iters < 1, step_tol <= 0.
  void validate() const;
};

struct SearchResult {
  Vec2 xp_star = Vec2::Zero();
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool accepted = false;
  std::string failure;               ///< Empty unless the search stopped on an error.
  std::vector<double> cost_history;  ///< Cost of every accepted iterate, starting point first.
  double min_sign_alignment = 1.0;   ///< Smallest <h_t, h_{t-1}> seen across the window, after alignment.
};

/// Gray source, gray target and the target's gradient, shared by every
/// search on one image pair.
struct SearchImages {
  SearchImages(const Image& source, const Image& target);

  Image source;
  Image target;
  Gradient target_grad;
};

struct CostResult {
  double cost = 0.0;
  int used = 0;
  int skipped = 0;
};

/// Sum over the window around round(x_star) of [I'(f(x | xp_star)) - I(x)]^2.
/// Samples landing outside I' are skipped. Throws UnreliableWindowError when
/// more than half the window is skipped or the window leaves I.
CostResult matching_cost(const SearchImages& images, const ApapWarp& warp, const Vec2& x_star,
                         const Vec2& xp_star, const SearchConfig& cfg);

/// Eigen-decomposition of S(x | xp_star) = S(x) + w*^2 m*^T m*.
struct AugmentedSystem {
  Mat9 S = Mat9::Zero();
  Vec9 eigenvalues = Vec9::Zero();
  Mat9 eigenvectors = Mat9::Zero();  ///< Column 0 is the sign-canonical solution.
  LocalHomography local;
  double w_star = 0.0;
  Mat29 m_star = Mat29::Zero();      ///< Appended rows, conditioned frame.
};

/// Explicit-weight form: `w` are the weights of the warp's own matches.
AugmentedSystem augmented_system(const ApapWarp& warp, std::span<const double> w, double w_star,
                                 const Vec2& x_star, const Vec2& xp_star);
/// Uses the warp's weights at x; w* = max(exp(-|x - x*|^2 / 2 sigma^2), gamma).
AugmentedSystem augmented_system(const ApapWarp& warp, const Vec2& x, const Vec2& x_star,
                                 const Vec2& xp_star);

LocalHomography augmented_solve(const ApapWarp& warp, const Vec2& x, const Vec2& x_star,
                                const Vec2& xp_star);

/// f(x | xp_star).
Vec2 augmented_eval(const ApapWarp& warp, const Vec2& x, const Vec2& x_star, const Vec2& xp_star);

/// d f(x | xp_star) / d xp_star through the eigenvector derivative
/// dh = (lambda I - S)^+ dS h. Throws IllConditionedError when the two
/// smallest eigenvalues are closer than 1e-10 * trace(S).
Mat2 warp_jacobian(const ApapWarp& warp, const AugmentedSystem& sys, const Vec2& x);
Mat2 warp_jacobian(const ApapWarp& warp, const Vec2& x, const Vec2& x_star, const Vec2& xp_star);

struct LkStep {
  Vec2 delta = Vec2::Zero();
  Mat2 F = Mat2::Zero();
  int used = 0;
  bool damped = false;
};

/// One Gauss-Newton update F^-1 sum J^T r with J = grad I'(f) * df/dxp.
/// F is damped by 1e-3 * trace(F) when its condition number exceeds 1e8.
/// Throws IllConditionedError when F stays singular or fewer than 8 pixels
/// are usable.
LkStep lk_step(const SearchImages& images, const ApapWarp& warp, const Vec2& x_star,
               const Vec2& xp_star, const SearchConfig& cfg);

/// Gauss-Newton search for the match of x_star, started at f(x_star), with a
/// step-halving line search (2^-k, k <= 5) that only accepts cost decreases.
/// Errors become a rejected result.
SearchResult search_correspondence(const SearchImages& images, const ApapWarp& warp,
                                   const Vec2& x_star, const SearchConfig& cfg);

}  // namespace apap
