#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "apap/correspondence.hpp"
#include "apap/image.hpp"

namespace apap {

/// Harris corners (k = 0.04, 3x3 box-smoothed structure tensor), strongest
/// first, greedily suppressed so that kept corners are at least
/// `min_distance` apart. Requires a gray image of at least 16x16.
std::vector<Vec2> harris_corners(const Image& img, int max_count, double min_distance);

/// Mutual-best normalized cross-correlation matching between two keypoint
/// lists. Keypoints whose window leaves the image, or whose window is flat,
/// are never matched. `window` must be odd.
CorrespondenceSet match_ncc(const Image& I, const Image& Ip, std::span<const Vec2> kps,
                            std::span<const Vec2> kps_p, int window, double min_score);

/// Correspondence CSV: header `x,y,xp,yp`, one match per row.
CorrespondenceSet read_correspondences(const std::filesystem::path& path);
CorrespondenceSet read_correspondences(std::istream& in);

/// Writes the CSV format above with round-trip exact decimals.
void write_correspondences(const CorrespondenceSet& set, const std::filesystem::path& path);
void write_correspondences(const CorrespondenceSet& set, std::ostream& out);

}  // namespace apap
