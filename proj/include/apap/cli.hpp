#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "apap/adapt.hpp"
#include "apap/lk_insert.hpp"
#include "apap/mdlt.hpp"
#include "apap/synth.hpp"

namespace apap {

/// Everything a run needs. Keys of the config file are the names printed by
/// format_config.
struct RunConfig {
  WarpConfig warp;
  SearchConfig search;
  AdaptConfig adapt;

  std::uint64_t seed = 0;          ///< RANSAC and scene generation.
  double ransac_threshold = 3.0;   ///< Pixels.
  int ransac_iters = 2000;
  int max_corners = 2000;
  double min_corner_distance = 8.0;
  int ncc_window = 11;
  double ncc_min_score = 0.8;

  bool run_adapt = false;
  bool seam = true;                ///< Seam cut composite, otherwise averaged overlap.
  bool normalize = false;          ///< Mean/variance color matching before compositing.
  bool trust_matches = false;      ///< Skip RANSAC for file matches.

  std::string scene = "two-plane";
  double parallax = 10.0;
  int scene_width = 640;
  int scene_height = 480;

  std::filesystem::path matches;
  std::filesystem::path out = "stitched.png";
  std::filesystem::path out_dir = "bench_out";
  std::filesystem::path dump_matches;
  std::filesystem::path dump_diff;
  std::filesystem::path insertion_log;

  /// Throws UsageError on an out-of-range field.
  void validate() const;
};

/// Sets one field from its textual value. Throws UsageError for an unknown
/// key or a malformed value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Applies `key = value` lines; blank lines and `#` comments are skipped.
/// Throws ParseError with the line number.
void apply_config_text(RunConfig& cfg, std::istream& in);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// One `key = value` line per tunable field, shortest round-trip numbers.
std::string format_config(const RunConfig& cfg);

struct BenchReport {
  double rmse_global = 0.0;
  double rmse_apap = 0.0;
  double rmse_ci = 0.0;
  std::size_t initial_matches = 0;
  std::size_t final_matches = 0;
  std::size_t tried = 0;
  std::size_t accepted = 0;
};

/// Initial matches of the two-plane benchmark: Harris corners of the source
/// on plane 1 paired with their exact ground-truth positions.
CorrespondenceSet bench_matches(const TwoPlaneScene& scene, const RunConfig& cfg);

/// Generates the scene, fits global-H, APAP and APAP+CI, writes scene files,
/// composites and CSVs into cfg.out_dir and prints the RMSE table.
BenchReport run_bench(const RunConfig& cfg, std::ostream& out);

/// Runs a subcommand. `args` excludes the program name. Returns the exit code:
/// 0 success, 1 usage, 2 data, 3 numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apap
