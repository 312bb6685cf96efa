#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "imaging.hpp"

namespace rpmkit::features {

using Descriptor = std::array<uint64_t, 4>; // 256 comparison bits

struct KeyPoint {
    float x = 0.0f; // level-0 coordinates, x right, y down
    float y = 0.0f;
    int level = 0;
    float response = 0.0f;
    float orientation_rad = 0.0f;
    Descriptor descriptor{};
};

struct DetectorConfig {
    int max_keypoints = 2000;
    int fast_threshold = 20;
    double scale_factor = 1.2;
    int n_levels = 8;
    int grid_cells = 16; // per axis
};

void validate_config(const DetectorConfig& config);

// Corner candidate; lx/ly are integer pixel coordinates on the level image,
// x/y the same position mapped back to level-0 coordinates.
struct Candidate {
    float x = 0.0f;
    float y = 0.0f;
    int lx = 0;
    int ly = 0;
    int level = 0;
    float response = 0.0f;
};

// Candidates are only considered with a 7 px margin; keypoints heading into
// descriptor extraction additionally need kDetectMargin (rotated pattern
// offsets reach +-19 px, plus the 5x5 smoothing window).
constexpr int kFastMargin = 7;
constexpr int kDetectMargin = 21;

// FAST-9 segment test: >= 9 contiguous pixels on the radius-3 Bresenham
// circle all brighter than center+threshold or all darker than
// center-threshold. Response is the sum of |I(p) - I(center)| over the
// qualifying run; 3x3 non-maximum suppression on response.
std::vector<Candidate> detect_fast(const imaging::Frame& level_image, int threshold);

// Grid-bucketed retention: grid_cells x grid_cells buckets over the given
// dimensions, per-bucket quota ceil(max_keypoints / bucket_count) by
// response, then a global top-response cut to max_keypoints. Ties broken by
// (y, x) ascending. Output sorted by (y, x, level).
std::vector<Candidate> retain_by_grid(const std::vector<Candidate>& candidates,
                                      const DetectorConfig& config, int width, int height);

// Intensity-centroid orientation over a radius-15 circular patch:
// atan2(m01, m10) with moments relative to (x, y). Zero moments give 0.
float compute_orientation(const imaging::Frame& level_image, int x, int y);

// 256 pairwise comparisons of 5x5 box-smoothed intensities at fixed offsets.
// The offset pattern is drawn once from a seeded generator (uniform in
// [-13, 13]^2) and rotated by the keypoint orientation, offsets rounded to
// the nearest pixel. Returns nullopt when a sample would leave the image.
std::optional<Descriptor> compute_descriptor(const imaging::Frame& level_image, int x, int y,
                                             float orientation_rad);

// The fixed sampling pattern: 256 offset pairs (p, q), p != q.
struct PatternPair {
    int8_t px, py, qx, qy;
};
const std::array<PatternPair, 256>& descriptor_pattern();

int hamming_distance(const Descriptor& a, const Descriptor& b);

struct Match {
    int index_a = 0;
    int index_b = 0;
    int hamming = 0;
};

// Nearest-neighbor matching with an absolute gate (<= 64), ratio test
// (nearest < 0.8 * second nearest) and mutual-best filtering. One-to-one.
std::vector<Match> match_descriptors(const std::vector<Descriptor>& set_a,
                                     const std::vector<Descriptor>& set_b);

// Full detector over a pyramid: FAST per level, pooled grid retention in
// level-0 coordinates, orientation and descriptor per surviving candidate.
std::vector<KeyPoint> detect_keypoints(const imaging::ImagePyramid& pyramid,
                                       const DetectorConfig& config);

} // namespace rpmkit::features
