#include <doctest.h>

#include <algorithm>

#include "apap/error.hpp"
#include "apap/lk_insert.hpp"
#include "apap/synth.hpp"
#include "support.hpp"

using namespace apap;
using apap::test::Gen;

namespace {

/// Smooth texture and its copy shifted by an integer (tx, ty), with exact matches.
struct ShiftedPair {
  Image source, target;
  CorrespondenceSet matches;
  Vec2 shift;
};

ShiftedPair shifted_pair(std::uint64_t seed, int tx, int ty, int n = 40) {
  const int w = 200, h = 160, pad = 20;
  const Image big = test::smooth_noise(w + 2 * pad, h + 2 * pad, seed, 2.0);
  ShiftedPair p;
  p.shift = Vec2(tx, ty);
  p.source = test::render(w, h, [&](double x, double y) { return big.at(static_cast<int>(x) + pad, static_cast<int>(y) + pad); });
  p.target = test::render(w, h, [&](double x, double y) {
    return big.at(static_cast<int>(x) - tx + pad, static_cast<int>(y) - ty + pad);
  });
  Gen g(seed);
  p.matches = test::exact_matches(g, Homography::translation(tx, ty).matrix(), n, w, h);
  return p;
}

ApapWarp noisy_warp(Gen& g, double noise, WarpConfig cfg = {}, int n = 30, double w = 160, double h = 120) {
  CorrespondenceSet X;
  const Mat3 H = g.homography(10.0);
  while (static_cast<int>(X.size()) < n) {
    const Vec2 x = g.point(0, 0, w, h);
    X.try_add({x, test::map_point(H, x) + Vec2(g.uniform(-noise, noise), g.uniform(-noise, noise))});
  }
  return ApapWarp(X, cfg);
}

/// Direct evaluation of the window cost, one augmented solve per pixel.
double brute_cost(const SearchImages& im, const ApapWarp& warp, const Vec2& xs, const Vec2& xps, int window) {
  const int r = window / 2;
  const int cx = static_cast<int>(std::lround(xs.x())), cy = static_cast<int>(std::lround(xs.y()));
  double e = 0.0;
  for (int y = cy - r; y <= cy + r; ++y)
    for (int x = cx - r; x <= cx + r; ++x) {
      const Vec2 f = augmented_eval(warp, Vec2(x, y), xs, xps);
      const auto v = sample_bilinear(im.target, f);
      if (!v) continue;
      const double d = *v - im.source.at(x, y);
      e += d * d;
    }
  return e;
}

}  // namespace

TEST_SUITE("lk_insert") {
  TEST_CASE("search config validation") {
    SearchConfig c;
    c.window = 30;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c.window = 3;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.step_tol = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    CHECK_NOTHROW(SearchConfig{}.validate());
  }

  TEST_CASE("cost vanishes on an exactly warped pair") {
    const ShiftedPair p = shifted_pair(1, 5, 3);
    const SearchImages im(p.source, p.target);
    const ApapWarp warp(p.matches);
    const Vec2 xs(100, 80);
    const CostResult c = matching_cost(im, warp, xs, xs + p.shift, SearchConfig{});
    CHECK(c.cost < 1e-6);
    CHECK(c.used + c.skipped == 31 * 31);
  }

  TEST_CASE("cost of constant images is zero anywhere") {
    const Image flat(120, 100, 1, 128.0);
    const SearchImages im(flat, flat);
    Gen g(2);
    const ApapWarp warp(test::exact_matches(g, Mat3::Identity(), 12, 120, 100));
    for (int k = 0; k < 10; ++k)
      CHECK(matching_cost(im, warp, Vec2(60, 50), g.point(40, 30, 80, 70), SearchConfig{}).cost == 0.0);
  }

  TEST_CASE("property: cost equals a per-pixel brute-force evaluation") {
    const TwoPlaneScene s = gen_two_plane_pair(320, 240, 4, 6.0);
    const SearchImages im(s.source, s.target);
    Gen g(4);
    CorrespondenceSet X;
    while (X.size() < 60) {
      const Vec2 x = g.point(10, 10, 310, 230);
      X.try_add({x, ground_truth_flow(s, x)});
    }
    const ApapWarp warp(X);
    SearchConfig cfg;
    cfg.window = 15;
    for (int k = 0; k < 10; ++k) {
      const Vec2 xs = g.point(80, 60, 240, 180);
      const Vec2 xps = ground_truth_flow(s, xs) + Vec2(2, 0);
      const double e = matching_cost(im, warp, xs, xps, cfg).cost;
      CHECK(std::abs(e - brute_cost(im, warp, xs, xps, cfg.window)) <= 1e-9 * std::max(1.0, e));
    }
  }

  TEST_CASE("unreliable windows") {
    const ShiftedPair p = shifted_pair(5, 0, 0);
    const SearchImages im(p.source, p.target);
    const ApapWarp warp(p.matches);
    CHECK_THROWS_AS(matching_cost(im, warp, Vec2(5, 80), Vec2(5, 80), SearchConfig{}), UnreliableWindowError);
    CHECK_THROWS_AS(matching_cost(im, warp, Vec2(100, 80), Vec2(400, 80), SearchConfig{}), UnreliableWindowError);
  }

  TEST_CASE("augmented solve far from the new point equals the plain solve") {
    Gen g(6);
    const ApapWarp warp = noisy_warp(g, 2.0, WarpConfig{30.0, 0.0, 8}, 80, 640, 480);
    const Vec2 xs(40, 40), x(500, 400);
    const LocalHomography a = augmented_solve(warp, x, xs, Vec2(25, 18));
    const LocalHomography b = solve_local_homography(warp, x);
    CHECK((a.h - b.h).norm() < 1e-9);
  }

  TEST_CASE("consistent or duplicated insertions leave h unchanged") {
    Gen g(7);
    const Mat3 H = g.homography(10.0);
    const auto X = test::exact_matches(g, H, 20, 160, 120);
    const ApapWarp warp(X);
    for (int k = 0; k < 20; ++k) {
      const Vec2 x = g.point(0, 0, 160, 120);
      const Vec2 xs = k % 2 ? g.point(0, 0, 160, 120) : X[static_cast<std::size_t>(k)].x;
      const LocalHomography a = augmented_solve(warp, x, xs, test::map_point(H, xs));
      const LocalHomography b = solve_local_homography(warp, x);
      CHECK((a.h - b.h).norm() < 1e-9);
      CHECK(a.lambda <= 1e-10);
    }
  }

  TEST_CASE("property: jacobian matches central differences") {
    Gen g(8);
    int valid = 0, good = 0, skipped = 0;
    while (valid < 200) {
      const ApapWarp warp = noisy_warp(g, 3.0);
      const Vec2 xs = warp.matches()[static_cast<std::size_t>(g.integer(0, 29))].x + Vec2(g.uniform(-6, 6), g.uniform(-6, 6));
      const Vec2 xps = apap_eval(warp, xs) + Vec2(g.uniform(-3, 3), g.uniform(-3, 3));
      const Vec2 x = xs + Vec2(g.uniform(-12, 12), g.uniform(-12, 12));
      Mat2 J;
      try {
        J = warp_jacobian(warp, x, xs, xps);
      } catch (const IllConditionedError&) {
        ++skipped;
        continue;
      }
      const double step = 1e-4;
      Mat2 fd;
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e(k) = step;
        fd.col(k) = (augmented_eval(warp, x, xs, xps + e) - augmented_eval(warp, x, xs, xps - e)) / (2 * step);
      }
      ++valid;
      if ((J - fd).norm() <= 1e-3 * fd.norm()) ++good;
    }
    MESSAGE("jacobian agreement " << good << "/200, skipped " << skipped);
    CHECK(good >= 190);
  }

  TEST_CASE("jacobian vanishes when the new point carries no weight") {
    Gen g(9);
    const ApapWarp warp = noisy_warp(g, 2.0, WarpConfig{30.0, 0.0, 8}, 80, 640, 480);
    const Mat2 J = warp_jacobian(warp, Vec2(500, 400), Vec2(40, 40), Vec2(44, 42));
    CHECK(J.cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("property: jacobian is invariant to a common weight scale") {
    Gen g(10);
    for (int trial = 0; trial < 20; ++trial) {
      const ApapWarp warp = noisy_warp(g, 3.0);
      const Vec2 xs = g.point(20, 20, 140, 100);
      const Vec2 xps = apap_eval(warp, xs) + Vec2(g.uniform(-2, 2), g.uniform(-2, 2));
      const Vec2 x = xs + Vec2(g.uniform(-8, 8), g.uniform(-8, 8));
      auto w = weights(warp, x);
      const double ws = weight(warp.config(), x, xs);
      const Mat2 a = warp_jacobian(warp, augmented_system(warp, w, ws, xs, xps), x);
      for (double& v : w) v *= 3.5;
      const Mat2 b = warp_jacobian(warp, augmented_system(warp, w, 3.5 * ws, xs, xps), x);
      CHECK((a - b).norm() <= 1e-9 * std::max(1.0, a.norm()));
    }
  }

  TEST_CASE("property: inserting a point is local when the floor is off") {
    Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
      const ApapWarp warp = noisy_warp(g, 2.0, WarpConfig{30.0, 0.0, 8}, 80, 640, 480);
      const Vec2 xs = g.point(0, 0, 640, 480);
      const Vec2 xps = apap_eval(warp, xs) + Vec2(g.uniform(-5, 5), g.uniform(-5, 5));
      for (int k = 0; k < 20; ++k) {
        const Vec2 x = g.point(0, 0, 640, 480);
        if ((x - xs).norm() <= 6 * 30.0) continue;
        CHECK((augmented_eval(warp, x, xs, xps) - apap_eval(warp, x)).norm() < 1e-6);
      }
    }
  }

  TEST_CASE("lk step at the solution of an exact pair is zero") {
    const ShiftedPair p = shifted_pair(12, 4, -2);
    const SearchImages im(p.source, p.target);
    const ApapWarp warp(p.matches);
    const Vec2 xs(90, 70);
    const LkStep st = lk_step(im, warp, xs, xs + p.shift, SearchConfig{});
    CHECK(st.delta.norm() < 1e-6);
    CHECK(st.used == 31 * 31);
  }

  TEST_CASE("lk step on a textureless window fails") {
    const Image flat(120, 100, 1, 90.0);
    const SearchImages im(flat, flat);
    Gen g(13);
    const ApapWarp warp(test::exact_matches(g, Mat3::Identity(), 12, 120, 100));
    CHECK_THROWS_AS(lk_step(im, warp, Vec2(60, 50), Vec2(60, 50), SearchConfig{}), IllConditionedError);
  }

  TEST_CASE("lk step from a one pixel offset reduces the cost") {
    const TwoPlaneScene s = gen_two_plane_pair(320, 240, 14, 0.0);
    const SearchImages im(s.source, s.target);
    Gen g(14);
    CorrespondenceSet X;
    while (X.size() < 30) {
      const Vec2 x = g.point(10, 10, 310, 230);
      X.try_add({x, ground_truth_flow(s, x)});
    }
    const ApapWarp warp(X);
    for (int k = 0; k < 10; ++k) {
      const Vec2 xs = g.point(80, 60, 240, 180);
      const Vec2 truth = ground_truth_flow(s, xs);
      const Vec2 start = truth + Vec2(1, 0);
      const LkStep st = lk_step(im, warp, xs, start, SearchConfig{});
      CHECK(st.delta.x() < 0.0);
      const SearchConfig cfg;
      CHECK(matching_cost(im, warp, xs, start + st.delta, cfg).cost < matching_cost(im, warp, xs, start, cfg).cost);
    }
  }

  TEST_CASE("search on a pre-aligned pair stops at once") {
    const ShiftedPair p = shifted_pair(15, 6, 2);
    const SearchImages im(p.source, p.target);
    const ApapWarp warp(p.matches);
    const SearchConfig cfg;
    for (const Vec2 xs : {Vec2(60, 50), Vec2(120, 90), Vec2(100, 40)}) {
      const SearchResult r = search_correspondence(im, warp, xs, cfg);
      CHECK(r.converged);
      CHECK(r.accepted);
      CHECK(r.iterations <= 2);
      CHECK((r.xp_star - apap_eval(warp, xs)).norm() < cfg.step_tol);
      CHECK(r.final_cost < 1e-6);
    }
  }

  TEST_CASE("search in a constant window is rejected without throwing") {
    const Image flat(120, 100, 1, 90.0);
    const SearchImages im(flat, flat);
    Gen g(16);
    const ApapWarp warp(test::exact_matches(g, Mat3::Identity(), 12, 120, 100));
    SearchResult r;
    CHECK_NOTHROW(r = search_correspondence(im, warp, Vec2(60, 50), SearchConfig{}));
    CHECK_FALSE(r.accepted);
    CHECK_FALSE(r.failure.empty());
  }

  TEST_CASE("property: searches descend monotonically with consistent signs") {
    const TwoPlaneScene s = gen_two_plane_pair(320, 240, 17, 8.0);
    const SearchImages im(s.source, s.target);
    Gen g(17);
    CorrespondenceSet X;
    while (X.size() < 30) {
      const Vec2 x = g.point(10, 10, s.crease - 5, 230);
      X.try_add({x, ground_truth_flow(s, x)});
    }
    const ApapWarp warp(X);
    SearchConfig cfg;
    cfg.max_iters = 10;
    for (int k = 0; k < 8; ++k) {
      const SearchResult r = search_correspondence(im, warp, g.point(s.crease + 20, 30, 290, 210), cfg);
      for (std::size_t i = 1; i < r.cost_history.size(); ++i) CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
      CHECK(r.min_sign_alignment >= 0.0);
      CHECK(r.final_cost >= 0.0);
      if (r.accepted) {
        CHECK(r.converged);
        CHECK(r.final_cost < cfg.accept_omega);
      }
    }
  }
}
