#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "apap/image.hpp"
#include "apap/mdlt.hpp"
#include "apap/types.hpp"

namespace apap {

enum class Label : std::uint8_t { None, Source, Target };

/// Per-pixel choice over a canvas. Overlap pixels carry Source or Target;
/// pixels covered by one image carry that image's label; uncovered pixels None.
struct SeamLabeling {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;
  double energy = 0.0;  ///< Sum of pairwise costs over disagreeing overlap neighbours.

  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

struct WarpedImage {
  Image image;
  ScalarMap mask;  ///< 1 where the pixel is covered.
};

/// Bounding box of the target frame and the forward-mapped source border
/// (sampled every 2 px). Throws DegenerateError when no border point maps.
Rect canvas_bounds(const std::function<Vec2(const Vec2&)>& forward, Size src, Size dst);
Rect canvas_bounds(const ApapWarp& warp, Size src, Size dst);

/// Grid whose every cell carries the same homography.
CachedWarp uniform_grid(const Mat3& H, const Rect& domain, int cell_size);

/// Backward warp onto `canvas` (target-frame coordinates): each canvas pixel
/// is pulled through the inverse of the cell that maps onto it.
WarpedImage warp_image(const Image& I, const CachedWarp& grid, const Rect& canvas);
/// Builds the grid over I's frame first.
WarpedImage warp_image(const Image& I, const ApapWarp& warp, const Rect& canvas);

/// Copies the target image into its footprint on `canvas`.
WarpedImage place_on_canvas(const Image& target, const Rect& canvas);

/// Two-label min-cut seam. Pairwise cost between 4-neighbours p, q of the
/// overlap is d(p) + d(q), d = channel-mean |A - B|. Overlap pixels touching
/// an A-only pixel are tied to Source, those touching a B-only pixel to Target.
SeamLabeling optimize_seam(const Image& A, const ScalarMap& maskA, const Image& B,
                           const ScalarMap& maskB);

/// Seam mode copies per label; without a labeling overlap pixels are averaged.
Image blend(const Image& A, const ScalarMap& maskA, const Image& B, const ScalarMap& maskB,
            const SeamLabeling* seam);

}  // namespace apap
