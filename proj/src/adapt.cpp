#include "apap/adapt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "apap/error.hpp"

namespace apap {

void AdaptConfig::validate() const {
  if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be non-negative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidInput("eta must lie in [0, 1]");
  if (!(rho >= 1.0)) throw InvalidInput("rho must be at least 1");
  if (!(omega > 0.0)) throw InvalidInput("omega must be positive");
  if (max_insertions < 0) throw InvalidInput("max_insertions must be non-negative");
}

ScalarMap residual_map(const Image& warped, const Image& target, const ScalarMap& overlap,
                       double epsilon) {
  if (warped.width != target.width || warped.height != target.height ||
      overlap.width != warped.width || overlap.height != warped.height)
    throw InvalidInput("residual_map: inputs must share one canvas");
  const Image a = to_grayscale(warped), b = to_grayscale(target);
  ScalarMap R(a.width, a.height);
  bool any = false;
  for (std::size_t i = 0; i < R.data.size(); ++i) {
    if (!(overlap.data[i] > 0.5)) continue;
    any = true;
    const double d = std::abs(a.data[i] - b.data[i]);
    R.data[i] = d < epsilon ? 0.0 : d;
  }
  if (!any) throw EmptyOverlapError("residual_map: empty overlap");
  return R;
}

ScalarMap saliency_map(const Image& img) {
  if (img.width < 16 || img.height < 16) throw InvalidInput("saliency_map: image smaller than 16x16");
  const Image gray = to_grayscale(img);
  const Gradient g = gradient(gray);
  const int w = gray.width, h = gray.height;

  // Integral image of squared gradient magnitude.
  std::vector<double> acc(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      const double e = g.gx.at(x, y) * g.gx.at(x, y) + g.gy.at(x, y) * g.gy.at(x, y);
      row += e;
      acc[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
          acc[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  const auto box = [&](int x0, int y0, int x1, int y1) {
    const auto at = [&](int x, int y) { return acc[static_cast<std::size_t>(y) * (w + 1) + x]; };
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  };

  constexpr int r = 7;
  ScalarMap out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      out.at(x, y) = box(x0, y0, x1, y1) / ((x1 - x0) * (y1 - y0));
    }
  }
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  const double mn = *lo, range = *hi - *lo;
  if (!(range > 1e-12 * std::max(1.0, std::abs(*hi)))) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    return out;
  }
  for (double& v : out.data) v = std::clamp((v - mn) / range, 0.0, 1.0);
  return out;
}

ScalarMap distance_transform(std::span<const Vec2> points, int width, int height) {
  if (points.empty()) throw InvalidInput("distance_transform: no points");
  if (width < 1 || height < 1) throw InvalidInput("distance_transform: empty grid");
  for (const auto& p : points)
    if (!p.allFinite()) throw InvalidInput("distance_transform: non-finite point");

  // Each point contributes the parabola (x - px)^2 + (y - py)^2 to row y.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].x() < points[b].x(); });

  ScalarMap out(width, height);
  std::vector<double> centers, offsets, bounds;
  for (int y = 0; y < height; ++y) {
    centers.clear();
    offsets.clear();
    bounds.clear();
    for (std::size_t idx : order) {
      const double a = points[idx].x();
      const double dy = y - points[idx].y();
      const double b = dy * dy;
      if (!centers.empty() && a == centers.back()) {
        if (b >= offsets.back()) continue;
        centers.pop_back();
        offsets.pop_back();
        if (!bounds.empty()) bounds.pop_back();
      }
      // Drop parabolas of the envelope that the new one dominates from their start.
      while (!centers.empty()) {
        const double ca = centers.back(), cb = offsets.back();
        const double s = ((b + a * a) - (cb + ca * ca)) / (2.0 * (a - ca));
        const double start = bounds.empty() ? -std::numeric_limits<double>::infinity() : bounds.back();
        if (s <= start) {
          centers.pop_back();
          offsets.pop_back();
          if (!bounds.empty()) bounds.pop_back();
          continue;
        }
        bounds.push_back(s);
        break;
      }
      centers.push_back(a);
      offsets.push_back(b);
    }
    std::size_t k = 0;
    for (int x = 0; x < width; ++x) {
      while (k < bounds.size() && bounds[k] < x) ++k;
      const double dx = x - centers[k];
      out.at(x, y) = std::sqrt(dx * dx + offsets[k]);
    }
  }
  return out;
}

std::optional<Pixel> select_candidate(const ScalarMap& R, const ScalarMap& D, double rho) {
  if (R.width != D.width || R.height != D.height)
    throw InvalidInput("select_candidate: R and D differ in size");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  std::optional<Pixel> at;
  for (int y = 0; y < R.height; ++y) {
    for (int x = 0; x < R.width; ++x) {
      const double r = R.at(x, y), d = D.at(x, y);
      if (!(r > 0.0) || !(d >= rho) || d == inf) continue;
      const double score = d / r;
      if (score < best) {
        best = score;
        at = Pixel{x, y};
      }
    }
  }
  return at;
}

RoundMaps build_round_maps(const SearchImages& images, const ApapWarp& warp,
                           const ScalarMap& saliency, std::span<const Vec2> L,
                           const AdaptConfig& cfg) {
  const Image& I = images.source;
  const Image& Ip = images.target;
  RoundMaps m;
  m.canvas = canvas_bounds(warp, I.size(), Ip.size());
  const CachedWarp grid = apap_eval_grid(warp, Rect{0, 0, I.width, I.height});
  m.warped = warp_image(I, grid, m.canvas);
  m.target = place_on_canvas(Ip, m.canvas);
  const int w = m.canvas.width, h = m.canvas.height;
  m.overlap = ScalarMap(w, h);
  for (std::size_t i = 0; i < m.overlap.data.size(); ++i)
    m.overlap.data[i] = (m.warped.mask.data[i] > 0.5 && m.target.mask.data[i] > 0.5) ? 1.0 : 0.0;

  m.raw = residual_map(m.warped.image, m.target.image, m.overlap, cfg.epsilon);
  m.seam = optimize_seam(m.warped.image, m.warped.mask, m.target.image, m.target.mask);
  m.R = m.raw;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double& r = m.R.at(x, y);
      if (r == 0.0) continue;
      if (m.seam.at(x, y) != Label::Source) {
        r = 0.0;
        continue;
      }
      const int tx = x + m.canvas.x, ty = y + m.canvas.y;
      if (saliency.at(tx, ty) < cfg.eta) r = 0.0;
    }
  }

  std::vector<Vec2> shifted;
  shifted.reserve(L.size());
  for (const auto& p : L) shifted.emplace_back(p.x() - m.canvas.x, p.y() - m.canvas.y);
  m.D = distance_transform(shifted, w, h);
  return m;
}

AdaptResult adapt_warp(const Image& I, const Image& Ip, const CorrespondenceSet& X0,
                       const WarpConfig& wcfg, const SearchConfig& scfg, const AdaptConfig& acfg) {
  wcfg.validate();
  scfg.validate();
  acfg.validate();
  if (X0.size() < 4) throw InvalidInput("adapt_warp: need at least 4 initial matches");

  const SearchImages images(I, Ip);
  const ScalarMap saliency = saliency_map(images.target);
  SearchConfig search = scfg;
  search.accept_omega = acfg.omega;

  AdaptState state{X0, {}, {}};
  for (const auto& c : X0) state.L.push_back(c.xp);

  for (int it = 0; it < acfg.max_insertions; ++it) {
    const ApapWarp warp(state.X, wcfg);
    const RoundMaps maps = build_round_maps(images, warp, saliency, state.L, acfg);
    const auto site = select_candidate(maps.R, maps.D, acfg.rho);
    if (!site) break;

    InsertionRecord rec;
    rec.iteration = it;
    rec.xp_min = Vec2(site->x + maps.canvas.x, site->y + maps.canvas.y);
    rec.cost = std::numeric_limits<double>::infinity();
    try {
      rec.x_star = apap_inverse(warp, rec.xp_min);
      const SearchResult res = search_correspondence(images, warp, rec.x_star, search);
      rec.xp_star = res.xp_star;
      rec.cost = res.final_cost;
      rec.accepted = res.accepted && state.X.try_add({rec.x_star, res.xp_star});
    } catch (const Error&) {
      rec.accepted = false;
    }
    state.log.push_back(rec);
    state.L.push_back(rec.xp_min);
  }

  ApapWarp final_warp(state.X, wcfg);
  CorrespondenceSet matches = state.X;
  return AdaptResult{std::move(matches), std::move(final_warp), std::move(state)};
}

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_insertion_log(std::span<const InsertionRecord> log, std::ostream& out) {
  out << "iteration,xp_min_x,xp_min_y,x_star_x,x_star_y,xp_star_x,xp_star_y,cost,accepted\n";
  for (const auto& r : log) {
    out << r.iteration;
    for (double v : {r.xp_min.x(), r.xp_min.y(), r.x_star.x(), r.x_star.y(), r.xp_star.x(),
                     r.xp_star.y(), r.cost}) {
      out << ',';
      put(out, v);
    }
    out << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

void write_insertion_log(std::span<const InsertionRecord> log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_insertion_log(log, out);
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace apap
