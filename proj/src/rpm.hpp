#pragma once

#include <cstdint>
#include <vector>

#include "geometry.hpp"
#include "tracking.hpp"

namespace rpmkit::rpm {

struct RpmConfig {
    std::vector<int> k_list = {2, 3, 4, 5, 6};
    double window_s = 5.0;
    bool anchors_enabled = true;
    std::vector<double> anchor_scale_fracs = {0.1, 0.2, 0.4}; // of min(W, H)
    std::vector<double> anchor_ratios = {0.5, 1.0, 2.0};      // height / width
    double nms_iou = 0.8;
    int min_cluster_points = 3;
    double bbox_pad_frac = 0.05;
    int kmeans_max_iters = 50;
    int kmeans_restarts = 5;
    uint64_t rng_seed = 0;
};

void validate_config(const RpmConfig& config);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Cluster {
    Point centroid;
    std::vector<int> member_indices; // into the input point list, ascending
    Box tight_box;                   // extent of the members; may be zero-area
};

struct KmeansResult {
    std::vector<Cluster> clusters;
    double sse = 0.0;
};

enum class ProposalSource { cluster_extent, anchor };

struct Proposal {
    Box box;
    double score = 0.0; // generating cluster population / windowed point count
    ProposalSource source = ProposalSource::cluster_extent;
    int k = 0;
    int cluster_index = 0;
    int anchor_index = -1; // -1 for cluster extents
};

// Lloyd's algorithm with kmeans++ initialization. Deterministic: every
// restart draws from a splitmix64 substream seeded by (seed, K, restart);
// the restart with the lowest SSE wins, ties by restart index. Empty
// clusters are repaired by moving the point farthest from its centroid.
KmeansResult kmeans(const std::vector<Point>& points, int k, uint64_t seed, int max_iters,
                    int restarts);

// Tight extent of the member points, degenerate axes inflated to 4 px
// centered on the centroid, padded by pad_frac * max(extent dims) per side
// (minimum 2 px when pad_frac > 0), clipped to the frame.
Box cluster_to_box(const std::vector<Point>& points, const Cluster& cluster, int frame_width,
                   int frame_height, double pad_frac);

// Nine standard boxes per centroid: area (scale * min(W,H))^2, h/w = ratio,
// centered on the centroid and clipped to the frame. Scale-major order.
std::vector<Box> anchors_at(Point centroid, int frame_width, int frame_height,
                            const std::vector<double>& scale_fracs,
                            const std::vector<double>& ratios);

// Greedy non-maximum suppression: score descending (ties: larger area, then
// input order); survivors are pairwise below the IoU threshold.
std::vector<Proposal> nms(std::vector<Proposal> proposals, double iou_threshold);

// Pre-suppression candidate set: per K in k_list (with enough points),
// cluster extents for clusters of at least min_cluster_points members, plus
// nine anchors per surviving centroid when enabled.
std::vector<Proposal> generate_candidates(const std::vector<Point>& points, int frame_width,
                                          int frame_height, const RpmConfig& config);

// Full pipeline step: windowed points -> candidates -> NMS, sorted by score
// descending then (x, y).
std::vector<Proposal> generate_proposals(const tracking::MapStore& store, double t_now,
                                         int frame_width, int frame_height,
                                         const RpmConfig& config);

std::vector<Point> to_points(const std::vector<tracking::WindowPoint>& window);

void sort_proposals(std::vector<Proposal>& proposals);

} // namespace rpmkit::rpm
