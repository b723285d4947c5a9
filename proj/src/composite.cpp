#include "apap/composite.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "apap/error.hpp"
#include "apap/geometry.hpp"
#include "apap/maxflow.hpp"

namespace apap {

Rect canvas_bounds(const std::function<Vec2(const Vec2&)>& forward, Size src, Size dst) {
  if (src.width < 1 || src.height < 1 || dst.width < 1 || dst.height < 1)
    throw InvalidInput("canvas_bounds: empty image shape");
  double x0 = 0.0, y0 = 0.0;
  double x1 = dst.width - 1.0, y1 = dst.height - 1.0;
  const double w = src.width - 1.0, h = src.height - 1.0;

  std::vector<Vec2> border;
  for (double x = 0.0; x < w; x += 2.0) {
    border.emplace_back(x, 0.0);
    border.emplace_back(x, h);
  }
  for (double y = 0.0; y < h; y += 2.0) {
    border.emplace_back(0.0, y);
    border.emplace_back(w, y);
  }
  border.emplace_back(w, h);

  int mapped = 0;
  for (const auto& p : border) {
    Vec2 q;
    try {
      q = forward(p);
    } catch (const Error&) {
      continue;
    }
    if (!q.allFinite()) continue;
    x0 = std::min(x0, q.x());
    y0 = std::min(y0, q.y());
    x1 = std::max(x1, q.x());
    y1 = std::max(y1, q.y());
    ++mapped;
  }
  if (mapped == 0) throw DegenerateError("canvas_bounds: warp is degenerate on the whole border");

  const double limit = 8.0 * std::max({src.width, src.height, dst.width, dst.height});
  if (x1 - x0 > limit || y1 - y0 > limit)
    throw DegenerateError("canvas_bounds: warped source spans an implausibly large canvas");
  // Bounds within 1e-6 px of an integer snap to it.
  const auto snap = [](double v) { return std::abs(v - std::round(v)) < 1e-6 ? std::round(v) : v; };
  Rect r;
  r.x = static_cast<int>(std::floor(snap(x0)));
  r.y = static_cast<int>(std::floor(snap(y0)));
  r.width = static_cast<int>(std::ceil(snap(x1))) - r.x + 1;
  r.height = static_cast<int>(std::ceil(snap(y1))) - r.y + 1;
  return r;
}

Rect canvas_bounds(const ApapWarp& warp, Size src, Size dst) {
  return canvas_bounds([&](const Vec2& p) { return apap_eval(warp, p); }, src, dst);
}

CachedWarp uniform_grid(const Mat3& H, const Rect& domain, int cell_size) {
  if (domain.empty() || cell_size < 1) throw InvalidInput("uniform_grid: empty domain");
  const double det = H.determinant();
  if (!(std::abs(det) > 1e-300)) throw DegenerateError("uniform_grid: singular homography");
  const int cols = (domain.width + cell_size - 1) / cell_size;
  const int rows = (domain.height + cell_size - 1) / cell_size;
  CachedWarp::Cell cell;
  cell.local.H = canonicalize(H);
  cell.inverse = canonicalize(H.inverse());
  std::vector<std::optional<CachedWarp::Cell>> cells(static_cast<std::size_t>(cols) * rows, cell);
  return CachedWarp(domain, cell_size, cols, rows, std::move(cells));
}

WarpedImage warp_image(const Image& I, const CachedWarp& grid, const Rect& canvas) {
  if (canvas.empty()) throw InvalidInput("warp_image: empty canvas");
  WarpedImage out{Image(canvas.width, canvas.height, I.channels), ScalarMap(canvas.width, canvas.height)};
  const double xmax = I.width - 1.0, ymax = I.height - 1.0;
  Pixel row_start = grid.cell_index(Vec2(grid.domain().x + grid.domain().width / 2.0,
                                         grid.domain().y + grid.domain().height / 2.0));
  for (int y = 0; y < canvas.height; ++y) {
    Pixel cell = row_start;
    for (int x = 0; x < canvas.width; ++x) {
      const Vec2 p(canvas.x + x, canvas.y + y);
      std::optional<Vec2> q;
      for (int it = 0; it < 8; ++it) {
        const auto& c = grid.cell(cell.x, cell.y);
        if (!c) {
          q.reset();
          break;
        }
        try {
          q = apply_homography(c->inverse, p);
        } catch (const Error&) {
          q.reset();
          break;
        }
        const Pixel next = grid.cell_index(*q);
        if (next == cell) break;
        cell = next;
      }
      if (x == 0) row_start = cell;
      if (!q || !(q->x() >= 0.0 && q->y() >= 0.0 && q->x() <= xmax && q->y() <= ymax)) continue;
      for (int ch = 0; ch < I.channels; ++ch) out.image.at(x, y, ch) = *sample_bilinear(I, *q, ch);
      out.mask.at(x, y) = 1.0;
    }
  }
  return out;
}

WarpedImage warp_image(const Image& I, const ApapWarp& warp, const Rect& canvas) {
  return warp_image(I, apap_eval_grid(warp, Rect{0, 0, I.width, I.height}), canvas);
}

WarpedImage place_on_canvas(const Image& target, const Rect& canvas) {
  WarpedImage out{Image(canvas.width, canvas.height, target.channels), ScalarMap(canvas.width, canvas.height)};
  for (int y = 0; y < canvas.height; ++y) {
    const int ty = canvas.y + y;
    if (ty < 0 || ty >= target.height) continue;
    for (int x = 0; x < canvas.width; ++x) {
      const int tx = canvas.x + x;
      if (tx < 0 || tx >= target.width) continue;
      for (int ch = 0; ch < target.channels; ++ch) out.image.at(x, y, ch) = target.at(tx, ty, ch);
      out.mask.at(x, y) = 1.0;
    }
  }
  return out;
}

namespace {

void check_canvas(const Image& A, const ScalarMap& maskA, const Image& B, const ScalarMap& maskB) {
  if (A.width != B.width || A.height != B.height || A.channels != B.channels ||
      maskA.width != A.width || maskA.height != A.height || maskB.width != A.width ||
      maskB.height != A.height)
    throw InvalidInput("images and masks must share one canvas");
}

}  // namespace

SeamLabeling optimize_seam(const Image& A, const ScalarMap& maskA, const Image& B,
                           const ScalarMap& maskB) {
  check_canvas(A, maskA, B, maskB);
  const int w = A.width, h = A.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  SeamLabeling out{w, h, std::vector<Label>(n, Label::None), 0.0};

  std::vector<int> node(n, -1);
  std::vector<double> diff(n, 0.0);
  int count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = maskA.data[i] > 0.5, b = maskB.data[i] > 0.5;
    if (a && b) {
      node[i] = count++;
      double d = 0.0;
      for (int ch = 0; ch < A.channels; ++ch)
        d += std::abs(A.data[i * A.channels + ch] - B.data[i * A.channels + ch]);
      diff[i] = d / A.channels;
    } else if (a) {
      out.labels[i] = Label::Source;
    } else if (b) {
      out.labels[i] = Label::Target;
    }
  }
  if (count == 0) return out;

  const auto exclusive = [&](int x, int y, Label which) {
    if (x < 0 || y < 0 || x >= w || y >= h) return false;
    const std::size_t j = static_cast<std::size_t>(y) * w + x;
    return node[j] < 0 && out.labels[j] == which;
  };
  std::vector<char> seed_src(n, 0), seed_dst(n, 0);
  bool any_src = false, any_dst = false;
  double cap_total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (node[i] < 0) continue;
      for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        if (exclusive(x + dx, y + dy, Label::Source)) seed_src[i] = 1;
        if (exclusive(x + dx, y + dy, Label::Target)) seed_dst[i] = 1;
      }
      any_src = any_src || seed_src[i];
      any_dst = any_dst || seed_dst[i];
      if (x + 1 < w && node[i + 1] >= 0) cap_total += diff[i] + diff[i + 1];
      if (y + 1 < h && node[i + w] >= 0) cap_total += diff[i] + diff[i + w];
    }
  }

  if (!any_src || !any_dst) {
    const Label all = any_dst || !any_src ? Label::Target : Label::Source;
    for (std::size_t i = 0; i < n; ++i)
      if (node[i] >= 0) out.labels[i] = all;
    return out;
  }

  MaxFlow graph(count);
  const double big = 1.0 + cap_total;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (node[i] < 0) continue;
      if (x + 1 < w && node[i + 1] >= 0) {
        const double c = diff[i] + diff[i + 1];
        graph.add_edge(node[i], node[i + 1], c, c);
      }
      if (y + 1 < h && node[i + w] >= 0) {
        const double c = diff[i] + diff[i + w];
        graph.add_edge(node[i], node[i + w], c, c);
      }
      if (seed_src[i] || seed_dst[i])
        graph.add_terminal(node[i], seed_src[i] ? big : 0.0, seed_dst[i] ? big : 0.0);
    }
  }
  graph.solve();
  // Of the minimum cuts, take the one with the smallest Target side.
  const std::vector<char> to_sink = graph.sink_side();
  for (std::size_t i = 0; i < n; ++i)
    if (node[i] >= 0) out.labels[i] = to_sink[node[i]] ? Label::Target : Label::Source;

  double energy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (node[i] < 0) continue;
      if (x + 1 < w && node[i + 1] >= 0 && out.labels[i] != out.labels[i + 1])
        energy += diff[i] + diff[i + 1];
      if (y + 1 < h && node[i + w] >= 0 && out.labels[i] != out.labels[i + w])
        energy += diff[i] + diff[i + w];
    }
  }
  out.energy = energy;
  return out;
}

Image blend(const Image& A, const ScalarMap& maskA, const Image& B, const ScalarMap& maskB,
            const SeamLabeling* seam) {
  check_canvas(A, maskA, B, maskB);
  if (seam && (seam->width != A.width || seam->height != A.height))
    throw InvalidInput("blend: labeling does not match the canvas");
  Image out(A.width, A.height, A.channels);
  const std::size_t n = static_cast<std::size_t>(A.width) * A.height;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = maskA.data[i] > 0.5, b = maskB.data[i] > 0.5;
    for (int ch = 0; ch < A.channels; ++ch) {
      const std::size_t k = i * A.channels + ch;
      double v = 0.0;
      if (a && b) {
        if (seam)
          v = seam->labels[i] == Label::Target ? B.data[k] : A.data[k];
        else
          v = 0.5 * (A.data[k] + B.data[k]);
      } else if (a) {
        v = A.data[k];
      } else if (b) {
        v = B.data[k];
      }
      out.data[k] = v;
    }
  }
  return out;
}

}  // namespace apap
