#include "apap/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "apap/composite.hpp"
#include "apap/error.hpp"
#include "apap/geometry.hpp"
#include "apap/matching.hpp"

namespace apap {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw UsageError("invalid value '" + text + "' for " + key);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw UsageError("non-finite value for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("invalid value '" + text + "' for " + key + " (expected true or false)");
}

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string number(int v) { return std::to_string(v); }

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Part, typename T>
Field nested(Part RunConfig::*part, T Part::*member) {
  return Field{[=](RunConfig& c, const std::string& v) { (c.*part).*member = parse_number<T>("", v); },
               [=](const RunConfig& c) { return number((c.*part).*member); }};
}

template <typename T>
Field scalar(T RunConfig::*member) {
  return Field{[=](RunConfig& c, const std::string& v) { c.*member = parse_number<T>("", v); },
               [=](const RunConfig& c) { return number(c.*member); }};
}

Field flag(bool RunConfig::*member) {
  return Field{[=](RunConfig& c, const std::string& v) { c.*member = parse_bool("", v); },
               [=](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field path(std::filesystem::path RunConfig::*member) {
  return Field{[=](RunConfig& c, const std::string& v) { c.*member = v; },
               [=](const RunConfig& c) { return (c.*member).string(); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> f;
    f.emplace_back("sigma", nested(&RunConfig::warp, &WarpConfig::sigma));
    f.emplace_back("gamma", nested(&RunConfig::warp, &WarpConfig::gamma));
    f.emplace_back("cell_size", nested(&RunConfig::warp, &WarpConfig::cell_size));
    f.emplace_back("window", nested(&RunConfig::search, &SearchConfig::window));
    f.emplace_back("max_iters", nested(&RunConfig::search, &SearchConfig::max_iters));
    f.emplace_back("step_tol", nested(&RunConfig::search, &SearchConfig::step_tol));
    f.emplace_back("damping", nested(&RunConfig::search, &SearchConfig::damping));
    f.emplace_back("epsilon", nested(&RunConfig::adapt, &AdaptConfig::epsilon));
    f.emplace_back("eta", nested(&RunConfig::adapt, &AdaptConfig::eta));
    f.emplace_back("rho", nested(&RunConfig::adapt, &AdaptConfig::rho));
    f.emplace_back("omega", Field{[](RunConfig& c, const std::string& v) {
                                    c.adapt.omega = parse_number<double>("", v);
                                    c.search.accept_omega = c.adapt.omega;
                                  },
                                  [](const RunConfig& c) { return number(c.adapt.omega); }});
    f.emplace_back("max_insertions", nested(&RunConfig::adapt, &AdaptConfig::max_insertions));
    f.emplace_back("seed", Field{[](RunConfig& c, const std::string& v) {
                                   c.seed = parse_number<std::uint64_t>("", v);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.emplace_back("ransac_threshold", scalar(&RunConfig::ransac_threshold));
    f.emplace_back("ransac_iters", scalar(&RunConfig::ransac_iters));
    f.emplace_back("max_corners", scalar(&RunConfig::max_corners));
    f.emplace_back("min_corner_distance", scalar(&RunConfig::min_corner_distance));
    f.emplace_back("ncc_window", scalar(&RunConfig::ncc_window));
    f.emplace_back("ncc_min_score", scalar(&RunConfig::ncc_min_score));
    f.emplace_back("adapt", flag(&RunConfig::run_adapt));
    f.emplace_back("composite", Field{[](RunConfig& c, const std::string& v) {
                                        if (v == "seam")
                                          c.seam = true;
                                        else if (v == "linear")
                                          c.seam = false;
                                        else
                                          throw UsageError("invalid value '" + v + "' (expected seam or linear)");
                                      },
                                      [](const RunConfig& c) { return std::string(c.seam ? "seam" : "linear"); }});
    f.emplace_back("normalize", flag(&RunConfig::normalize));
    f.emplace_back("trust_matches", flag(&RunConfig::trust_matches));
    f.emplace_back("scene", Field{[](RunConfig& c, const std::string& v) { c.scene = v; },
                                  [](const RunConfig& c) { return c.scene; }});
    f.emplace_back("parallax", scalar(&RunConfig::parallax));
    f.emplace_back("scene_width", scalar(&RunConfig::scene_width));
    f.emplace_back("scene_height", scalar(&RunConfig::scene_height));
    f.emplace_back("matches", path(&RunConfig::matches));
    f.emplace_back("out", path(&RunConfig::out));
    f.emplace_back("out_dir", path(&RunConfig::out_dir));
    f.emplace_back("dump_matches", path(&RunConfig::dump_matches));
    f.emplace_back("dump_diff", path(&RunConfig::dump_diff));
    f.emplace_back("insertion_log", path(&RunConfig::insertion_log));
    return f;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
  try {
    warp.validate();
    search.validate();
    adapt.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (!(ransac_threshold > 0.0)) throw UsageError("ransac_threshold must be positive");
  if (ransac_iters < 1) throw UsageError("ransac_iters must be at least 1");
  if (max_corners < 4) throw UsageError("max_corners must be at least 4");
  if (!(min_corner_distance >= 0.0)) throw UsageError("min_corner_distance must be non-negative");
  if (ncc_window < 3 || ncc_window % 2 == 0) throw UsageError("ncc_window must be odd and at least 3");
  if (!(ncc_min_score >= -1.0 && ncc_min_score <= 1.0)) throw UsageError("ncc_min_score must lie in [-1, 1]");
  if (scene != "two-plane") throw UsageError("unknown scene '" + scene + "' (only two-plane)");
  if (!(parallax >= 0.0)) throw UsageError("parallax must be non-negative");
  if (scene_width < 32 || scene_height < 32) throw UsageError("scene must be at least 32x32");
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name != key) continue;
    try {
      field.set(cfg, value);
    } catch (const UsageError&) {
      throw UsageError("invalid value '" + value + "' for " + key);
    }
    return;
  }
  throw UsageError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const UsageError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  apply_config_text(cfg, in);
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

namespace {

struct Composite {
  Rect canvas;
  WarpedImage warped;
  WarpedImage target;
  ScalarMap overlap;
  Image image;
};

Composite render(const Image& I, const Image& Ip, const CachedWarp& grid, const Rect& canvas,
                 const RunConfig& cfg) {
  Composite c;
  c.canvas = canvas;
  c.warped = warp_image(I, grid, canvas);
  c.target = place_on_canvas(Ip, canvas);
  c.overlap = ScalarMap(canvas.width, canvas.height);
  for (std::size_t i = 0; i < c.overlap.data.size(); ++i)
    c.overlap.data[i] = c.warped.mask.data[i] > 0.5 && c.target.mask.data[i] > 0.5 ? 1.0 : 0.0;
  Image A = c.warped.image, B = c.target.image;
  if (A.channels != B.channels) {
    A = to_grayscale(A);
    B = to_grayscale(B);
  }
  if (cfg.normalize) std::tie(A, B) = normalize_colors(A, B, c.overlap);
  if (cfg.seam) {
    const SeamLabeling seam = optimize_seam(A, c.warped.mask, B, c.target.mask);
    c.image = blend(A, c.warped.mask, B, c.target.mask, &seam);
  } else {
    c.image = blend(A, c.warped.mask, B, c.target.mask, nullptr);
  }
  return c;
}

Composite render(const Image& I, const Image& Ip, const ApapWarp& warp, const RunConfig& cfg) {
  const Rect canvas = canvas_bounds(warp, I.size(), Ip.size());
  return render(I, Ip, apap_eval_grid(warp, Rect{0, 0, I.width, I.height}), canvas, cfg);
}

double overlap_rmse(const Composite& c) { return alignment_rmse(c.warped.image, c.target.image, c.overlap); }

/// Residual after the epsilon gate, cropped to the target frame.
ScalarMap target_frame_residual(const Composite& c, const Image& Ip, double epsilon) {
  const ScalarMap R = residual_map(c.warped.image, c.target.image, c.overlap, epsilon);
  ScalarMap out(Ip.width, Ip.height);
  for (int y = 0; y < Ip.height; ++y)
    for (int x = 0; x < Ip.width; ++x) out.at(x, y) = R.at(x - c.canvas.x, y - c.canvas.y);
  return out;
}

CorrespondenceSet pair_matches(const Image& I, const Image& Ip, const RunConfig& cfg, std::ostream& out) {
  CorrespondenceSet X;
  if (!cfg.matches.empty()) {
    X = read_correspondences(cfg.matches);
    out << "read " << X.size() << " matches from " << cfg.matches.string() << "\n";
    if (cfg.trust_matches) return X;
  } else {
    const Image g = to_grayscale(I), gp = to_grayscale(Ip);
    const auto k = harris_corners(g, cfg.max_corners, cfg.min_corner_distance);
    const auto kp = harris_corners(gp, cfg.max_corners, cfg.min_corner_distance);
    X = match_ncc(g, gp, k, kp, cfg.ncc_window, cfg.ncc_min_score);
    out << "matched " << X.size() << " of " << k.size() << "/" << kp.size() << " corners\n";
  }
  const RansacResult r = ransac_homography(X.items(), cfg.ransac_threshold, cfg.ransac_iters, cfg.seed);
  out << "ransac kept " << r.inliers.size() << " inliers\n";
  return r.inliers;
}

void write_csv_matches(const CorrespondenceSet& X, const std::filesystem::path& file) {
  write_correspondences(X, file);
}

int cmd_stitch(const RunConfig& cfg, const std::string& a, const std::string& b, std::ostream& out) {
  const Image I = load_image(a), Ip = load_image(b);
  CorrespondenceSet X = pair_matches(I, Ip, cfg, out);
  ApapWarp warp(X, cfg.warp);
  if (cfg.run_adapt) {
    AdaptResult res = adapt_warp(I, Ip, X, cfg.warp, cfg.search, cfg.adapt);
    std::size_t accepted = 0;
    for (const auto& r : res.state.log) accepted += r.accepted ? 1 : 0;
    out << "adapt tried " << res.state.log.size() << " sites, accepted " << accepted << "\n";
    if (!cfg.insertion_log.empty()) write_insertion_log(res.state.log, cfg.insertion_log);
    X = res.matches;
    warp = std::move(res.warp);
  }
  const Composite c = render(I, Ip, warp, cfg);
  save_image(c.image, cfg.out);
  out << "wrote " << cfg.out.string() << " (" << c.canvas.width << "x" << c.canvas.height << ")\n";
  if (!cfg.dump_matches.empty()) write_csv_matches(X, cfg.dump_matches);
  if (!cfg.dump_diff.empty()) save_image(map_to_image(target_frame_residual(c, Ip, cfg.adapt.epsilon)), cfg.dump_diff);
  return 0;
}

int cmd_diff(const RunConfig& cfg, const std::string& a, const std::string& b, std::ostream& out) {
  const Image I = load_image(a), Ip = load_image(b);
  const CorrespondenceSet X = pair_matches(I, Ip, cfg, out);
  const ApapWarp warp(X, cfg.warp);
  RunConfig linear = cfg;
  linear.seam = false;
  const Composite c = render(I, Ip, warp, linear);
  save_image(map_to_image(target_frame_residual(c, Ip, cfg.adapt.epsilon)), cfg.out);
  out << "wrote " << cfg.out.string() << "\n";
  return 0;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

CorrespondenceSet bench_matches(const TwoPlaneScene& scene, const RunConfig& cfg) {
  const auto corners = harris_corners(to_grayscale(scene.source), cfg.max_corners, cfg.min_corner_distance);
  const double xmax = scene.target.width - 1.0, ymax = scene.target.height - 1.0;
  CorrespondenceSet X(Provenance::Synthetic);
  for (const Vec2& c : corners) {
    if (!(c.x() < scene.crease)) continue;
    const Vec2 g = ground_truth_flow(scene, c);
    if (g.x() < 0.0 || g.y() < 0.0 || g.x() > xmax || g.y() > ymax) continue;
    X.try_add({c, g});
  }
  return X;
}

BenchReport run_bench(const RunConfig& cfg, std::ostream& out) {
  const TwoPlaneScene scene = gen_two_plane_pair(cfg.scene_width, cfg.scene_height, cfg.seed, cfg.parallax);
  const std::filesystem::path dir = cfg.out_dir;
  export_scene(scene, dir / "scene");

  const CorrespondenceSet X0 = bench_matches(scene, cfg);
  if (X0.size() < 4) throw DegenerateError("bench: fewer than four plane-1 corners");
  const Image& I = scene.source;
  const Image& Ip = scene.target;

  const Homography Hg = dlt_homography(X0.items());
  const Rect canvas_g = canvas_bounds([&](const Vec2& p) { return apply_homography(Hg, p); }, I.size(), Ip.size());
  const Composite global = render(I, Ip, uniform_grid(Hg.matrix(), Rect{0, 0, I.width, I.height}, cfg.warp.cell_size),
                                  canvas_g, cfg);

  const ApapWarp apap(X0, cfg.warp);
  const Composite plain = render(I, Ip, apap, cfg);

  const AdaptResult res = adapt_warp(I, Ip, X0, cfg.warp, cfg.search, cfg.adapt);
  const Composite ci = render(I, Ip, res.warp, cfg);

  BenchReport rep;
  rep.rmse_global = overlap_rmse(global);
  rep.rmse_apap = overlap_rmse(plain);
  rep.rmse_ci = overlap_rmse(ci);
  rep.initial_matches = X0.size();
  rep.final_matches = res.matches.size();
  rep.tried = res.state.log.size();
  for (const auto& r : res.state.log) rep.accepted += r.accepted ? 1 : 0;

  save_image(global.image, dir / "composite_global.png");
  save_image(plain.image, dir / "composite_apap.png");
  save_image(ci.image, dir / "composite_apap_ci.png");
  write_correspondences(X0, dir / "matches_initial.csv");
  write_correspondences(res.matches, dir / "matches_adapted.csv");
  write_insertion_log(res.state.log, dir / "insertion_log.csv");
  {
    std::ofstream csv(dir / "rmse.csv");
    if (!csv) throw IoError("cannot write " + (dir / "rmse.csv").string());
    csv << "method,rmse,matches\n";
    csv << "global-H," << number(rep.rmse_global) << "," << rep.initial_matches << "\n";
    csv << "APAP," << number(rep.rmse_apap) << "," << rep.initial_matches << "\n";
    csv << "APAP+CI," << number(rep.rmse_ci) << "," << rep.final_matches << "\n";
  }

  out << "scene two-plane " << cfg.scene_width << "x" << cfg.scene_height << " seed " << cfg.seed
      << " parallax " << number(cfg.parallax) << "\n";
  out << "insertions tried " << rep.tried << ", accepted " << rep.accepted << "\n";
  out << "method    rmse        matches\n";
  const auto row = [&](const std::string& name, double v, std::size_t n) {
    std::string cell = name;
    cell.resize(10, ' ');
    std::string val = fixed(v, 6);
    val.resize(12, ' ');
    out << cell << val << n << "\n";
  };
  row("global-H", rep.rmse_global, rep.initial_matches);
  row("APAP", rep.rmse_apap, rep.initial_matches);
  row("APAP+CI", rep.rmse_ci, rep.final_matches);
  out << "ratio APAP+CI / APAP = " << fixed(rep.rmse_ci / rep.rmse_apap, 4) << "\n";
  return rep;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallax-tolerant two-image stitching with moving DLT warps", "apap"};
  app.require_subcommand(1, 1);

  std::vector<std::pair<CLI::Option*, std::string>> given;
  std::map<std::string, std::string> raw;
  std::string config_path;
  std::vector<std::string> images;

  const std::map<std::string, std::string> help = {
      {"sigma", "Gaussian bandwidth of the moving weights (px)"},
      {"gamma", "Weight floor"},
      {"cell_size", "Grid cell edge for warping (px)"},
      {"window", "Search window side (odd, px)"},
      {"max_iters", "Search iteration cap"},
      {"step_tol", "Search convergence step (px)"},
      {"damping", "Added to the search Hessian diagonal"},
      {"epsilon", "Residuals below this are ignored"},
      {"eta", "Saliency gate in [0, 1]"},
      {"rho", "Minimum spacing of insertion sites (px)"},
      {"omega", "Acceptance bound on the window cost"},
      {"max_insertions", "Cap on tried insertion sites"},
      {"seed", "Seed of RANSAC and scene generation"},
      {"matches", "Correspondence CSV (x,y,xp,yp) instead of corner matching"},
      {"out", "Output image"},
      {"dump_matches", "Write the final correspondences as CSV"},
      {"dump_diff", "Write the residual map in the target frame"},
      {"insertion_log", "Write the insertion log CSV"},
      {"ransac_threshold", "RANSAC inlier threshold (px)"},
      {"ransac_iters", "RANSAC iterations"},
      {"max_corners", "Harris corners per image"},
      {"min_corner_distance", "Minimum spacing of Harris corners (px)"},
      {"ncc_window", "NCC patch side (odd, px)"},
      {"ncc_min_score", "Minimum NCC score of a match"},
      {"scene", "Synthetic scene (two-plane)"},
      {"parallax", "Largest displacement between the two planes (px)"},
      {"out_dir", "Directory for benchmark outputs"},
      {"scene_width", "Scene width (px)"},
      {"scene_height", "Scene height (px)"},
  };
  const auto tunable = [&](CLI::App* sub, const std::string& key) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    given.emplace_back(sub->add_option("--" + name, raw[key], help.at(key))->type_name("VALUE"), key);
  };
  const auto toggle = [&](CLI::App* sub, const std::string& name, const std::string& key,
                          const std::string& value, const std::string& text) {
    CLI::Option* o = sub->add_flag(name, text);
    given.emplace_back(o, key + "=" + value);
    return o;
  };
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Flat 'key = value' file, overridden by flags");
    for (const char* key : {"sigma", "gamma", "cell_size", "window", "max_iters", "step_tol", "damping",
                            "epsilon", "eta", "rho", "omega", "max_insertions", "seed"})
      tunable(sub, key);
  };

  CLI::App* stitch = app.add_subcommand("stitch", "Align and composite a pair of images");
  stitch->add_option("source", images, "Source and target images")->expected(2)->required();
  common(stitch);
  for (const char* key : {"matches", "out", "dump_matches", "dump_diff", "insertion_log", "ransac_threshold",
                          "ransac_iters", "max_corners", "min_corner_distance", "ncc_window", "ncc_min_score"})
    tunable(stitch, key);
  toggle(stitch, "--adapt", "adapt", "true", "Insert correspondences where alignment is poor");
  CLI::Option* seam = toggle(stitch, "--seam", "composite", "seam", "Seam-cut composite (default)");
  CLI::Option* linear = toggle(stitch, "--linear", "composite", "linear", "Average the overlap");
  seam->excludes(linear);
  toggle(stitch, "--normalize", "normalize", "true", "Match colors inside the overlap");
  toggle(stitch, "--trust-matches", "trust_matches", "true", "Use file matches without RANSAC");

  CLI::App* diff = app.add_subcommand("diff", "Write the residual map of an aligned pair");
  diff->add_option("source", images, "Source and target images")->expected(2)->required();
  common(diff);
  given.emplace_back(diff->add_option("--matches", raw["matches"], "Correspondence CSV")->required(), "matches");
  given.emplace_back(diff->add_option("--out", raw["out"], "Output PNG")->required(), "out");
  for (const char* key : {"ransac_threshold", "ransac_iters"}) tunable(diff, key);
  toggle(diff, "--trust-matches", "trust_matches", "true", "Use file matches without RANSAC");

  CLI::App* bench = app.add_subcommand("bench", "Synthetic two-plane benchmark");
  common(bench);
  for (const char* key : {"scene", "parallax", "out_dir", "scene_width", "scene_height", "max_corners",
                          "min_corner_distance"})
    tunable(bench, key);
  CLI::Option* bseam = toggle(bench, "--seam", "composite", "seam", "Seam-cut composites (default)");
  CLI::Option* blinear = toggle(bench, "--linear", "composite", "linear", "Averaged composites");
  bseam->excludes(blinear);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [opt, key] : given) {
      if (opt->count() == 0) continue;
      const auto eq = key.find('=');
      if (eq != std::string::npos)
        set_config_value(cfg, key.substr(0, eq), key.substr(eq + 1));
      else
        set_config_value(cfg, key, raw[key]);
    }
    cfg.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage ? 1 : 2;
  }

  out << format_config(cfg);
  try {
    if (app.got_subcommand(stitch)) return cmd_stitch(cfg, images[0], images[1], out);
    if (app.got_subcommand(diff)) return cmd_diff(cfg, images[0], images[1], out);
    run_bench(cfg, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Usage: return 1;
      case ErrorKind::Data: return 2;
      case ErrorKind::Numerical: return 3;
    }
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace apap
