#pragma once

// Reference implementations used to cross-check the library. Each is written
// straight from the mathematical definition and shares no logic with the
// code under test: the FAST check scans every run start/length explicitly,
// the clustering optimum comes from exhaustive bipartition enumeration, and
// IoU is approximated by rasterization.

#include <vector>

#include "geometry.hpp"
#include "imaging.hpp"
#include "rpm.hpp"

namespace oracle {

// FAST-9 segment test at (x, y): some run of >= 9 contiguous circle pixels
// all brighter than center + threshold, or all darker than center -
// threshold. Returns false within 3 px of the border.
bool is_fast9_corner(const rpmkit::imaging::Frame& image, int x, int y, int threshold);

// Optimal K=2 sum of squared distances over all 2^(n-1) - 1 bipartitions.
double best_sse_k2(const std::vector<rpmkit::rpm::Point>& points);

// IoU estimated by counting cells of size `cell` whose centers fall in each
// box; accurate to O(cell) for boxes of unit-or-larger dimensions.
double iou_rasterized(const rpmkit::Box& a, const rpmkit::Box& b, double cell);

// Intensity-centroid orientation from directly accumulated patch moments.
float orientation_direct(const rpmkit::imaging::Frame& image, int cx, int cy);

} // namespace oracle
