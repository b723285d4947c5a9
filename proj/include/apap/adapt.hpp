#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "apap/composite.hpp"
#include "apap/correspondence.hpp"
#include "apap/image.hpp"
#include "apap/lk_insert.hpp"
#include "apap/mdlt.hpp"

namespace apap {

struct AdaptConfig {
  double epsilon = 100.0;   ///< Residuals below this are ignored (intensity units).
  double eta = 0.5;         ///< Saliency gate on the normalized map.
  double rho = 15.0;        ///< Minimum spacing of tried sites, target pixels.
  double omega = 1000.0;    ///< Acceptance bound on the search cost.
  int max_insertions = 200; ///< Cap on tried sites.

  void validate() const;
};

struct InsertionRecord {
  int iteration = 0;
  Vec2 xp_min = Vec2::Zero();   ///< Selected target-frame site.
  Vec2 x_star = Vec2::Zero();   ///< Its inverse-warped source point.
  Vec2 xp_star = Vec2::Zero();  ///< Search result.
  double cost = 0.0;
  bool accepted = false;
};

struct AdaptState {
  CorrespondenceSet X;
  std::vector<Vec2> L;  ///< Tried target-frame sites, seeded with the initial x'_i.
  std::vector<InsertionRecord> log;
};

struct AdaptResult {
  CorrespondenceSet matches;
  ApapWarp warp;
  AdaptState state;
};

/// |warped - target| inside the overlap, 0 elsewhere, values below epsilon zeroed.
/// Color inputs are converted to gray. Throws EmptyOverlapError.
ScalarMap residual_map(const Image& warped, const Image& target, const ScalarMap& overlap,
                       double epsilon);

/// Squared gradient magnitude averaged over a 15x15 box, min-max normalized
/// to [0, 1]; a flat image maps to all zeros.
ScalarMap saliency_map(const Image& img);

/// Exact Euclidean distance from every pixel center to the nearest point.
ScalarMap distance_transform(std::span<const Vec2> points, int width, int height);

/// Argmin of D ./ R with R = 0, D = inf and D < rho all scoring +inf. Ties go
/// to the first pixel in row-major order; none when every score is +inf.
std::optional<Pixel> select_candidate(const ScalarMap& R, const ScalarMap& D, double rho);

/// Maps of one adaptation round, all on `canvas` (target-frame coordinates).
struct RoundMaps {
  Rect canvas;
  WarpedImage warped;
  WarpedImage target;
  ScalarMap overlap;
  ScalarMap raw;        ///< Residual after the epsilon gate only.
  SeamLabeling seam;
  ScalarMap R;          ///< After the epsilon, seam and saliency gates.
  ScalarMap D;
};

/// Builds the gated residual and distance maps for the current warp.
/// `saliency` is over the target frame; `L` are target-frame points.
RoundMaps build_round_maps(const SearchImages& images, const ApapWarp& warp,
                           const ScalarMap& saliency, std::span<const Vec2> L,
                           const AdaptConfig& cfg);

/// Grows X0 by searching for matches at the worst-aligned salient sites.
/// Search failures are logged as rejections.
AdaptResult adapt_warp(const Image& I, const Image& Ip, const CorrespondenceSet& X0,
                       const WarpConfig& wcfg, const SearchConfig& scfg, const AdaptConfig& acfg);

/// CSV: iteration,xp_min_x,xp_min_y,x_star_x,x_star_y,xp_star_x,xp_star_y,cost,accepted
void write_insertion_log(std::span<const InsertionRecord> log, std::ostream& out);
void write_insertion_log(std::span<const InsertionRecord> log, const std::filesystem::path& path);

}  // namespace apap
