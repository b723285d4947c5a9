#include "apap/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "apap/error.hpp"

namespace apap {

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {}

ScalarMap::ScalarMap(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

unsigned char to_byte(double v) {
  if (!std::isfinite(v)) return v > 0 ? 255 : 0;
  return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
}

Image load_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw IoError("unsupported PNG bit depth (only 8-bit is accepted): " + path.string());
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw IoError("corrupt PNG " + path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), color ? 3 : 1);
  std::copy(buffer.begin(), buffer.end(), img.data.begin());
  return img;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int pnm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = pnm_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit))
    throw IoError("corrupt PNM header in " + path.string());
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw IoError("corrupt PNM header in " + path.string());
  }
}

Image load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw IoError("unsupported format (expected binary PGM/PPM): " + path.string());
  const int channels = magic[1] == '6' ? 3 : 1;
  // The token reader consumes exactly one whitespace byte after maxval.
  const int w = pnm_int(in, path);
  const int h = pnm_int(in, path);
  const int maxval = pnm_int(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0) throw IoError("corrupt PNM header in " + path.string());
  if (maxval > 255) throw IoError("unsupported PNM bit depth (maxval > 255): " + path.string());

  Image img(w, h, channels);
  std::vector<unsigned char> raw(img.data.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated PNM payload in " + path.string());
  const double scale = 255.0 / maxval;
  for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] * scale;
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char head[8] = {0};
  probe.read(reinterpret_cast<char*>(head), 8);
  const auto got = probe.gcount();
  if (got < 2) throw IoError("file too short to be an image: " + path.string());
  if (got == 8 && png_sig_cmp(head, 0, 8) == 0) return load_png(path);
  if (head[0] == 'P') return load_pnm(path);
  throw IoError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3)
    throw InvalidInput("save_image: channels must be 1 or 3");
  std::vector<unsigned char> bytes(img.data.size());
  std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);

  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".ppm") {
    if ((ext == ".pgm") != (img.channels == 1))
      throw InvalidInput("extension " + ext + " does not match channel count");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (img.channels == 1 ? "P5" : "P6") << '\n'
        << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path.string());
    return;
  }

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
}

Image map_to_image(const ScalarMap& map) {
  Image img(map.width, map.height, 1);
  std::transform(map.data.begin(), map.data.end(), img.data.begin(), [](double v) {
    return std::isinf(v) ? 255.0 : std::clamp(v, 0.0, 255.0);
  });
  return img;
}

Image to_grayscale(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw InvalidInput("to_grayscale: channels must be 1 or 3");
  Image gray(img.width, img.height, 1);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    const double* px = &img.data[3 * i];
    gray.data[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return gray;
}

namespace {

template <typename Fetch>
std::optional<double> bilinear(int width, int height, const Vec2& p, Fetch fetch) {
  const double x = p.x();
  const double y = p.y();
  if (!(x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1)) return std::nullopt;
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, std::max(width - 2, 0));
  y0 = std::min(y0, std::max(height - 2, 0));
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double top = (1.0 - fx) * fetch(x0, y0) + fx * fetch(x1, y0);
  const double bottom = (1.0 - fx) * fetch(x0, y1) + fx * fetch(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

std::optional<double> sample_bilinear(const Image& img, const Vec2& p, int c) {
  return bilinear(img.width, img.height, p,
                  [&](int x, int y) { return img.at(x, y, c); });
}

std::optional<double> sample_bilinear(const ScalarMap& map, const Vec2& p) {
  return bilinear(map.width, map.height, p, [&](int x, int y) { return map.at(x, y); });
}

Gradient gradient(const Image& img) {
  if (img.width < 3 || img.height < 3)
    throw InvalidInput("gradient: image must be at least 3x3");
  if (img.channels != 1) throw InvalidInput("gradient: expects a single-channel image");
  const int w = img.width;
  const int h = img.height;
  Gradient g{ScalarMap(w, h), ScalarMap(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x == 0)
        g.gx.at(x, y) = img.at(1, y) - img.at(0, y);
      else if (x == w - 1)
        g.gx.at(x, y) = img.at(w - 1, y) - img.at(w - 2, y);
      else
        g.gx.at(x, y) = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));

      if (y == 0)
        g.gy.at(x, y) = img.at(x, 1) - img.at(x, 0);
      else if (y == h - 1)
        g.gy.at(x, y) = img.at(x, h - 1) - img.at(x, h - 2);
      else
        g.gy.at(x, y) = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
    }
  }
  return g;
}

std::pair<Image, Image> normalize_colors(const Image& src, const Image& dst,
                                         const ScalarMap& overlap) {
  if (src.width != dst.width || src.height != dst.height || src.channels != dst.channels ||
      overlap.width != src.width || overlap.height != src.height)
    throw InvalidInput("normalize_colors: images and mask must share one canvas");

  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < overlap.data.size(); ++i)
    if (overlap.data[i] > 0.5) inside.push_back(i);
  if (inside.empty()) throw EmptyOverlapError("normalize_colors: empty overlap");

  Image out = src;
  const double n = static_cast<double>(inside.size());
  for (int c = 0; c < src.channels; ++c) {
    double ms = 0.0, md = 0.0;
    for (std::size_t i : inside) {
      ms += src.data[i * src.channels + c];
      md += dst.data[i * dst.channels + c];
    }
    ms /= n;
    md /= n;
    double vs = 0.0, vd = 0.0;
    for (std::size_t i : inside) {
      const double a = src.data[i * src.channels + c] - ms;
      const double b = dst.data[i * dst.channels + c] - md;
      vs += a * a;
      vd += b * b;
    }
    const double ss = std::sqrt(vs / n);
    const double sd = std::sqrt(vd / n);
    // Flat source channel: shift only.
    const double gain = ss > 1e-12 ? sd / ss : 1.0;
    for (std::size_t i = 0; i < out.data.size() / out.channels; ++i) {
      double& v = out.data[i * out.channels + c];
      v = (v - ms) * gain + md;
    }
  }
  return {std::move(out), dst};
}

}  // namespace apap
