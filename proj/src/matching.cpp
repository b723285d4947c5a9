#include "apap/matching.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "apap/error.hpp"

namespace apap {

namespace {

ScalarMap box3(const ScalarMap& in) {
  ScalarMap out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= in.width || yy >= in.height) continue;
          s += in.at(xx, yy);
          ++n;
        }
      }
      out.at(x, y) = s / n;
    }
  }
  return out;
}

struct Scored {
  double response;
  int x, y;
};

}  // namespace

std::vector<Vec2> harris_corners(const Image& img, int max_count, double min_distance) {
  if (img.channels != 1) throw InvalidInput("harris_corners: expects a gray image");
  if (img.width < 16 || img.height < 16) throw InvalidInput("harris_corners: image smaller than 16x16");
  if (max_count <= 0) return {};

  const Gradient g = gradient(img);
  const int w = img.width, h = img.height;
  ScalarMap ixx(w, h), iyy(w, h), ixy(w, h);
  for (std::size_t i = 0; i < ixx.data.size(); ++i) {
    ixx.data[i] = g.gx.data[i] * g.gx.data[i];
    iyy.data[i] = g.gy.data[i] * g.gy.data[i];
    ixy.data[i] = g.gx.data[i] * g.gy.data[i];
  }
  ixx = box3(ixx);
  iyy = box3(iyy);
  ixy = box3(ixy);

  constexpr double k = 0.04;
  ScalarMap response(w, h);
  double peak = 0.0;
  for (std::size_t i = 0; i < response.data.size(); ++i) {
    const double a = ixx.data[i], b = iyy.data[i], c = ixy.data[i];
    response.data[i] = a * b - c * c - k * (a + b) * (a + b);
    peak = std::max(peak, response.data[i]);
  }
  if (!(peak > 0.0)) return {};

  std::vector<Scored> candidates;
  const double floor = 0.01 * peak;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double r = response.at(x, y);
      if (r <= floor) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && response.at(x + dx, y + dy) > r) {
            is_max = false;
            break;
          }
      if (is_max) candidates.push_back({r, x, y});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Scored& a, const Scored& b) { return a.response > b.response; });

  std::vector<Vec2> kept;
  const double min_d2 = min_distance * min_distance;
  for (const auto& c : candidates) {
    const Vec2 p(c.x, c.y);
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](const Vec2& q) {
      return (q - p).squaredNorm() < min_d2;
    });
    if (clear) kept.push_back(p);
    if (static_cast<int>(kept.size()) >= max_count) break;
  }
  return kept;
}

namespace {

// Zero-mean, unit-norm window around a keypoint; empty when it leaves the
// image or is flat.
std::vector<double> ncc_patch(const Image& img, const Vec2& p, int radius) {
  const int cx = static_cast<int>(std::lround(p.x()));
  const int cy = static_cast<int>(std::lround(p.y()));
  if (cx - radius < 0 || cy - radius < 0 || cx + radius >= img.width || cy + radius >= img.height)
    return {};
  std::vector<double> patch;
  patch.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (int y = cy - radius; y <= cy + radius; ++y)
    for (int x = cx - radius; x <= cx + radius; ++x) patch.push_back(img.at(x, y));
  double mean = 0.0;
  for (double v : patch) mean += v;
  mean /= static_cast<double>(patch.size());
  double norm = 0.0;
  for (double& v : patch) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-9) return {};
  for (double& v : patch) v /= norm;
  return patch;
}

}  // namespace

CorrespondenceSet match_ncc(const Image& I, const Image& Ip, std::span<const Vec2> kps,
                            std::span<const Vec2> kps_p, int window, double min_score) {
  if (window <= 0 || window % 2 == 0) throw InvalidInput("match_ncc: window must be odd");
  if (I.channels != 1 || Ip.channels != 1) throw InvalidInput("match_ncc: expects gray images");
  const int radius = window / 2;

  std::vector<std::vector<double>> pa, pb;
  for (const auto& p : kps) pa.push_back(ncc_patch(I, p, radius));
  for (const auto& p : kps_p) pb.push_back(ncc_patch(Ip, p, radius));

  const std::size_t na = kps.size(), nb = kps_p.size();
  constexpr double none = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(na * nb, none);
  for (std::size_t i = 0; i < na; ++i) {
    if (pa[i].empty()) continue;
    for (std::size_t j = 0; j < nb; ++j) {
      if (pb[j].empty()) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < pa[i].size(); ++k) s += pa[i][k] * pb[j][k];
      scores[i * nb + j] = s;
    }
  }

  std::vector<std::size_t> best_a(na, nb), best_b(nb, na);
  for (std::size_t i = 0; i < na; ++i) {
    double top = none;
    for (std::size_t j = 0; j < nb; ++j)
      if (scores[i * nb + j] > top) {
        top = scores[i * nb + j];
        best_a[i] = j;
      }
  }
  for (std::size_t j = 0; j < nb; ++j) {
    double top = none;
    for (std::size_t i = 0; i < na; ++i)
      if (scores[i * nb + j] > top) {
        top = scores[i * nb + j];
        best_b[j] = i;
      }
  }

  CorrespondenceSet out(Provenance::Detector);
  // Exact-1 correlations can come out a few ulps low.
  const double threshold = min_score - 1e-12;
  for (std::size_t i = 0; i < na; ++i) {
    const std::size_t j = best_a[i];
    if (j == nb || best_b[j] != i) continue;
    if (scores[i * nb + j] < threshold) continue;
    out.try_add({kps[i], kps_p[j]});
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, int line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(value))
    throw ParseError("malformed number '" + std::string(field) + "'", line);
  return value;
}

}  // namespace

CorrespondenceSet read_correspondences(std::istream& in) {
  CorrespondenceSet set(Provenance::File);
  std::string raw;
  int line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty()) continue;
    if (!header_seen) {
      std::string squashed;
      for (char ch : text)
        if (ch != ' ' && ch != '\t') squashed.push_back(ch);
      if (squashed != "x,y,xp,yp") throw ParseError("expected header 'x,y,xp,yp'", line);
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      fields.push_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4)
      throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), line);
    const Correspondence c{Vec2(parse_field(fields[0], line), parse_field(fields[1], line)),
                           Vec2(parse_field(fields[2], line), parse_field(fields[3], line))};
    if (set.contains_source(c.x))
      throw DuplicateError("line " + std::to_string(line) + ": duplicate source point");
    set.add(c);
  }
  if (!header_seen) throw ParseError("missing header 'x,y,xp,yp'", std::max(line, 1));
  return set;
}

CorrespondenceSet read_correspondences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open correspondence file " + path.string());
  return read_correspondences(in);
}

namespace {

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_correspondences(const CorrespondenceSet& set, std::ostream& out) {
  out << "x,y,xp,yp\n";
  for (const auto& c : set) {
    put_number(out, c.x.x());
    out << ',';
    put_number(out, c.x.y());
    out << ',';
    put_number(out, c.xp.x());
    out << ',';
    put_number(out, c.xp.y());
    out << '\n';
  }
}

void write_correspondences(const CorrespondenceSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_correspondences(set, out);
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace apap
