#include <doctest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "apap/error.hpp"
#include "apap/maxflow.hpp"
#include "support.hpp"

using namespace apap;
using apap::test::Gen;

namespace {

struct Edge {
  int u, v;
  double cap;
};

struct Instance {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<double> src, snk;
};

Instance random_instance(Gen& g) {
  Instance in;
  in.n = g.integer(1, 11);
  in.src.assign(static_cast<std::size_t>(in.n), 0.0);
  in.snk.assign(static_cast<std::size_t>(in.n), 0.0);
  const bool integral = g.coin();
  const auto cap = [&] { return integral ? static_cast<double>(g.integer(0, 5)) : g.uniform(0, 3); };
  for (int v = 0; v < in.n; ++v) {
    if (g.integer(0, 2) == 0) in.src[v] = cap();
    if (g.integer(0, 2) == 0) in.snk[v] = cap();
  }
  const int m = g.integer(0, 3 * in.n);
  for (int k = 0; k < m && in.n > 1; ++k) {
    const int u = g.integer(0, in.n - 1);
    int v = g.integer(0, in.n - 2);
    if (v >= u) ++v;
    in.edges.push_back({u, v, cap()});
  }
  return in;
}

/// Capacity of the cut whose source side is `S`.
double cut_value(const Instance& in, const std::vector<char>& S) {
  double c = 0.0;
  for (int v = 0; v < in.n; ++v) c += S[v] ? in.snk[v] : in.src[v];
  for (const auto& e : in.edges)
    if (S[e.u] && !S[e.v]) c += e.cap;
  return c;
}

double brute_min_cut(const Instance& in) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> S(static_cast<std::size_t>(in.n));
  for (unsigned mask = 0; mask < (1u << in.n); ++mask) {
    for (int v = 0; v < in.n; ++v) S[v] = static_cast<char>((mask >> v) & 1u);
    best = std::min(best, cut_value(in, S));
  }
  return best;
}

}  // namespace

TEST_SUITE("maxflow") {
  TEST_CASE("a single chain") {
    MaxFlow f(3);
    f.add_terminal(0, 5.0, 0.0);
    f.add_edge(0, 1, 2.0);
    f.add_edge(1, 2, 4.0);
    f.add_terminal(2, 0.0, 3.0);
    CHECK(f.solve() == doctest::Approx(2.0));
    CHECK(f.source_side() == std::vector<char>{1, 0, 0});
    CHECK(f.sink_side() == std::vector<char>{0, 1, 1});
  }

  TEST_CASE("terminal capacities on one node cancel") {
    MaxFlow f(1);
    f.add_terminal(0, 3.0, 1.0);
    f.add_terminal(0, 0.0, 1.5);
    CHECK(f.solve() == doctest::Approx(2.5));
  }

  TEST_CASE("bad input") {
    CHECK_THROWS_AS(MaxFlow(0), InvalidInput);
    MaxFlow f(2);
    CHECK_THROWS_AS(f.add_edge(0, 0, 1.0), InvalidInput);
    CHECK_THROWS_AS(f.add_edge(0, 1, -1.0), InvalidInput);
    CHECK_THROWS_AS(f.add_edge(0, 1, std::numeric_limits<double>::infinity()), InvalidInput);
    CHECK_THROWS_AS(f.add_terminal(0, -1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(f.add_edge(0, 2, 1.0), InvalidInput);
  }

  TEST_CASE("property: max flow equals the brute-force min cut") {
    Gen g(1);
    for (int trial = 0; trial < 400; ++trial) {
      const Instance in = random_instance(g);
      MaxFlow f(in.n);
      for (int v = 0; v < in.n; ++v) f.add_terminal(v, in.src[v], in.snk[v]);
      for (const auto& e : in.edges) f.add_edge(e.u, e.v, e.cap);
      const double flow = f.solve();
      const double best = brute_min_cut(in);
      const double tol = 1e-9 * std::max(1.0, best);
      CHECK(std::abs(flow - best) <= tol);

      const auto S = f.source_side();
      CHECK(std::abs(cut_value(in, S) - best) <= tol);
      auto T = f.sink_side();
      for (char& c : T) c = static_cast<char>(!c);
      CHECK(std::abs(cut_value(in, T) - best) <= tol);
      for (int v = 0; v < in.n; ++v) CHECK(!(S[v] && !T[v]));
    }
  }

  TEST_CASE("property: paired edges behave as two arcs") {
    Gen g(2);
    for (int trial = 0; trial < 200; ++trial) {
      Instance in = random_instance(g);
      MaxFlow paired(in.n), split(in.n);
      for (int v = 0; v < in.n; ++v) {
        paired.add_terminal(v, in.src[v], in.snk[v]);
        split.add_terminal(v, in.src[v], in.snk[v]);
      }
      for (const auto& e : in.edges) {
        const double back = g.uniform(0, 2);
        paired.add_edge(e.u, e.v, e.cap, back);
        split.add_edge(e.u, e.v, e.cap);
        split.add_edge(e.v, e.u, back);
      }
      CHECK(paired.solve() == doctest::Approx(split.solve()).epsilon(1e-9));
    }
  }

  TEST_CASE("a grid with a cheap column cut") {
    const int w = 40, h = 30;
    MaxFlow f(w * h);
    for (int y = 0; y < h; ++y) {
      f.add_terminal(y * w, 1e6, 0.0);
      f.add_terminal(y * w + w - 1, 0.0, 1e6);
      for (int x = 0; x + 1 < w; ++x) {
        const double c = x == 23 ? 0.5 : 10.0;
        f.add_edge(y * w + x, y * w + x + 1, c, c);
      }
      for (int x = 0; x < w && y + 1 < h; ++x) f.add_edge(y * w + x, (y + 1) * w + x, 10.0, 10.0);
    }
    CHECK(f.solve() == doctest::Approx(0.5 * h));
    const auto S = f.source_side();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) CHECK(S[y * w + x] == (x <= 23 ? 1 : 0));
  }
}
