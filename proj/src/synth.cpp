#include "apap/synth.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "apap/error.hpp"

namespace apap {

namespace {

constexpr double kSpacing = 40.0;     // lattice pitch of the dots
constexpr double kJitter = 6.0;       // max offset of a dot from its cell center
constexpr double kCoreSigma = 2.0;
constexpr double kHaloSigma = 6.0;
constexpr double kHaloShare = 0.2;
constexpr double kBackground = 20.0;
constexpr double kWaveAmplitude = 1.0;  // per wave, six waves

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

DotTexture::DotTexture(std::uint64_t seed, double x0, double y0, double x1, double y1)
    : x0_(x0), y0_(y0) {
  cols_ = static_cast<int>(std::ceil((x1 - x0) / kSpacing)) + 1;
  rows_ = static_cast<int>(std::ceil((y1 - y0) / kSpacing)) + 1;
  std::mt19937_64 rng(seed);
  dots_.reserve(static_cast<std::size_t>(cols_) * rows_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const double jx = (2.0 * uniform(rng) - 1.0) * kJitter;
      const double jy = (2.0 * uniform(rng) - 1.0) * kJitter;
      const double amp = 150.0 + 40.0 * uniform(rng);
      dots_.push_back({x0 + (c + 0.5) * kSpacing + jx, y0 + (r + 0.5) * kSpacing + jy, amp});
    }
  }
  for (int k = 0; k < 6; ++k) {
    const double wavelength = 60.0 + 100.0 * uniform(rng);
    const double angle = 2.0 * M_PI * uniform(rng);
    const double kk = 2.0 * M_PI / wavelength;
    waves_.push_back({kk * std::cos(angle), kk * std::sin(angle), 2.0 * M_PI * uniform(rng),
                      kWaveAmplitude});
  }
}

double DotTexture::operator()(double x, double y) const {
  double v = kBackground;
  for (const auto& w : waves_) v += w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
  const int ci = static_cast<int>(std::floor((x - x0_) / kSpacing));
  const int ri = static_cast<int>(std::floor((y - y0_) / kSpacing));
  const double core = 1.0 / (2.0 * kCoreSigma * kCoreSigma);
  const double halo = 1.0 / (2.0 * kHaloSigma * kHaloSigma);
  for (int r = ri - 1; r <= ri + 1; ++r) {
    if (r < 0 || r >= rows_) continue;
    for (int c = ci - 1; c <= ci + 1; ++c) {
      if (c < 0 || c >= cols_) continue;
      const Dot& d = dots_[static_cast<std::size_t>(r) * cols_ + c];
      const double d2 = (x - d.x) * (x - d.x) + (y - d.y) * (y - d.y);
      v += d.amplitude * (std::exp(-d2 * core) + kHaloShare * std::exp(-d2 * halo));
    }
  }
  return v;
}

TwoPlaneScene gen_two_plane_pair(int width, int height, std::uint64_t seed, double parallax) {
  if (width < 32 || height < 32) throw InvalidInput("gen_two_plane_pair: frame smaller than 32x32");
  if (!(parallax >= 0.0) || !std::isfinite(parallax))
    throw InvalidInput("gen_two_plane_pair: parallax must be non-negative");

  TwoPlaneScene s;
  s.seed = seed;
  s.parallax = parallax;
  s.crease = width / 2.0;
  const double c = s.crease;

  Mat3 H1;
  H1 << 1.0, 0.01, 40.0,
        -0.005, 1.0, 6.0,
        2e-6, 1e-6, 1.0;
  const double t = parallax / ((width - 1.0 - c) * std::sqrt(1.0 + 0.0625));
  Mat3 G;
  G << 1.0 + t, 0.0, -t * c,
       0.25 * t, 1.0, -0.25 * t * c,
       0.0, 0.0, 1.0;
  s.H1 = Homography(H1);
  s.H2 = Homography(H1 * G);

  const double pad = 200.0;
  const DotTexture tex(seed, -pad, -pad, width + pad, height + pad);

  s.source = Image(width, height, 1);
  s.plane = ScalarMap(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      s.source.at(x, y) = tex(x, y);
      s.plane.at(x, y) = x < c ? 1.0 : 2.0;
    }
  }

  const Mat3 H1inv = s.H1.matrix().inverse();
  const Mat3 Ginv = G.inverse();
  s.target = Image(width, height, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 a = H1inv * Vec3(x, y, 1.0);
      Vec2 p(a.x() / a.z(), a.y() / a.z());
      if (p.x() >= c) {
        const Vec3 b = Ginv * Vec3(p.x(), p.y(), 1.0);
        const Vec2 q(b.x() / b.z(), b.y() / b.z());
        if (q.x() >= c) p = q;
      }
      s.target.at(x, y) = tex(p.x(), p.y());
    }
  }
  return s;
}

Vec2 ground_truth_flow(const TwoPlaneScene& scene, const Vec2& x) {
  if (!(x.x() >= 0.0 && x.y() >= 0.0 && x.x() <= scene.source.width - 1.0 &&
        x.y() <= scene.source.height - 1.0))
    throw InvalidInput("ground_truth_flow: point outside the source frame");
  return apply_homography(x.x() < scene.crease ? scene.H1 : scene.H2, x);
}

double alignment_rmse(const Image& warped, const Image& target, const ScalarMap& overlap) {
  if (warped.width != target.width || warped.height != target.height ||
      overlap.width != warped.width || overlap.height != warped.height)
    throw InvalidInput("alignment_rmse: inputs must share one canvas");
  const Image a = to_grayscale(warped), b = to_grayscale(target);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < overlap.data.size(); ++i) {
    if (!(overlap.data[i] > 0.5)) continue;
    const double d = a.data[i] - b.data[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw EmptyOverlapError("alignment_rmse: empty overlap");
  return std::sqrt(sum / static_cast<double>(n));
}

std::string format_homography(const Mat3& H) {
  std::string out;
  char buf[64];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9f", H(r, c));
      out += buf;
      out += c < 2 ? ' ' : '\n';
    }
  }
  return out;
}

Mat3 read_homography(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open homography file " + path.string());
  Mat3 H;
  for (int i = 0; i < 9; ++i) {
    double v;
    if (!(in >> v) || !std::isfinite(v)) throw IoError("malformed homography file " + path.string());
    H(i / 3, i % 3) = v;
  }
  std::string rest;
  if (in >> rest) throw IoError("trailing data in homography file " + path.string());
  return H;
}

void export_scene(const TwoPlaneScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_image(scene.source, dir / "source.png");
  save_image(scene.target, dir / "target.png");
  Image plane(scene.plane.width, scene.plane.height, 1);
  for (std::size_t i = 0; i < plane.data.size(); ++i) plane.data[i] = scene.plane.data[i] == 1.0 ? 0.0 : 255.0;
  save_image(plane, dir / "plane.png");
  for (const auto& [name, H] : {std::pair{"H1.txt", &scene.H1}, std::pair{"H2.txt", &scene.H2}}) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << format_homography(H->matrix());
  }
}

}  // namespace apap
