#pragma once

#include <vector>

#include "yarnscope/raster.hpp"

namespace yarnscope {

/// Zhang-Suen thinning. Pixels outside the raster count as background.
BinaryImage skeletonize(const BinaryImage& bin);

/// Number of foreground pixels among the 8 neighbours.
int neighbor_count(const BinaryImage& bin, int x, int y);
int neighbor_count(const BinaryImage& bin, int x, int y, Connectivity connectivity);

/// Number of 0->1 transitions walking the 8-neighbourhood clockwise from north.
/// A value >= 3 marks a branch point of a thin curve.
int crossing_number(const BinaryImage& bin, int x, int y);

/// Replaces every diagonal-only step with a corner pixel so the curve is
/// 4-connected.
BinaryImage make_four_connected(const BinaryImage& skel);

using PixelPath = std::vector<Point>;

/// Removes branch points, then walks every remaining component end to end.
/// With Connectivity::Four the skeleton is first made 4-connected and branch
/// points are pixels with three or more 4-neighbours.
std::vector<PixelPath> skeleton_paths(const BinaryImage& skel, Connectivity connectivity);

}  // namespace yarnscope
