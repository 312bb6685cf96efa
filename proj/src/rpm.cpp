#include "rpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace rpmkit::rpm {

namespace {

double dist2(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// kmeans++ seeding: first centroid uniform, then D^2-weighted draws. When
// every candidate distance is zero (duplicate points) fall back to a uniform
// draw so initialization still terminates.
std::vector<Point> seed_centroids(const std::vector<Point>& points, int k, SplitMix64& rng) {
    const size_t n = points.size();
    std::vector<Point> centroids;
    centroids.reserve(static_cast<size_t>(k));
    centroids.push_back(points[rng.uniform_below(n)]);

    std::vector<double> d2(n, 0.0);
    while (centroids.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& c : centroids)
                best = std::min(best, dist2(points[i], c));
            d2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double cum = 0.0;
            pick = n - 1; // guards against accumulated rounding at the tail
            for (size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > u) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_below(n);
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

struct LloydState {
    std::vector<Point> centroids;
    std::vector<int> assignment;
    double sse = 0.0;
};

// Assign every point to its nearest centroid (ties: lowest centroid index).
void assign_points(const std::vector<Point>& points, const std::vector<Point>& centroids,
                   std::vector<int>& assignment) {
    for (size_t i = 0; i < points.size(); ++i) {
        int best_c = 0;
        double best_d = dist2(points[i], centroids[0]);
        for (size_t c = 1; c < centroids.size(); ++c) {
            const double d = dist2(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best_c = static_cast<int>(c);
            }
        }
        assignment[i] = best_c;
    }
}

// Give each empty cluster the point currently farthest from its own centroid,
// drawing only from clusters that can spare one (ties: lowest point index).
void repair_empty(const std::vector<Point>& points, const std::vector<Point>& centroids, int k,
                  std::vector<int>& assignment) {
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int a : assignment)
        counts[static_cast<size_t>(a)]++;
    for (int c = 0; c < k; ++c) {
        while (counts[static_cast<size_t>(c)] == 0) {
            int donor_point = -1;
            double worst = -1.0;
            for (size_t i = 0; i < points.size(); ++i) {
                const int a = assignment[i];
                if (counts[static_cast<size_t>(a)] <= 1)
                    continue;
                const double d = dist2(points[i], centroids[static_cast<size_t>(a)]);
                if (d > worst) {
                    worst = d;
                    donor_point = static_cast<int>(i);
                }
            }
            if (donor_point < 0)
                raise(Errc::internal, "empty-cluster repair found no donor");
            counts[static_cast<size_t>(assignment[donor_point])]--;
            assignment[static_cast<size_t>(donor_point)] = c;
            counts[static_cast<size_t>(c)]++;
        }
    }
}

void update_centroids(const std::vector<Point>& points, const std::vector<int>& assignment, int k,
                      std::vector<Point>& centroids) {
    std::vector<double> sx(static_cast<size_t>(k), 0.0), sy(static_cast<size_t>(k), 0.0);
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < points.size(); ++i) {
        const auto a = static_cast<size_t>(assignment[i]);
        sx[a] += points[i].x;
        sy[a] += points[i].y;
        counts[a]++;
    }
    for (int c = 0; c < k; ++c) {
        const auto u = static_cast<size_t>(c);
        if (counts[u] > 0)
            centroids[u] = Point{sx[u] / counts[u], sy[u] / counts[u]};
    }
}

LloydState run_restart(const std::vector<Point>& points, int k, uint64_t stream_seed,
                       int max_iters) {
    SplitMix64 rng(stream_seed);
    LloydState st;
    st.centroids = seed_centroids(points, k, rng);
    st.assignment.assign(points.size(), 0);

    std::vector<int> prev;
    for (int iter = 0; iter < max_iters; ++iter) {
        assign_points(points, st.centroids, st.assignment);
        repair_empty(points, st.centroids, k, st.assignment);
        if (st.assignment == prev)
            break;
        prev = st.assignment;
        update_centroids(points, st.assignment, k, st.centroids);
    }
    update_centroids(points, st.assignment, k, st.centroids);

    st.sse = 0.0;
    for (size_t i = 0; i < points.size(); ++i)
        st.sse += dist2(points[i], st.centroids[static_cast<size_t>(st.assignment[i])]);
    return st;
}

} // namespace

void validate_config(const RpmConfig& config) {
    if (config.k_list.empty())
        raise(Errc::invalid_argument, "k_list must not be empty");
    for (int k : config.k_list)
        if (k < 1)
            raise(Errc::invalid_argument, "every K must be at least 1");
    if (!(config.window_s > 0.0))
        raise(Errc::invalid_argument, "window seconds must be positive");
    for (double s : config.anchor_scale_fracs)
        if (!(s > 0.0))
            raise(Errc::invalid_argument, "anchor scales must be positive");
    for (double r : config.anchor_ratios)
        if (!(r > 0.0))
            raise(Errc::invalid_argument, "anchor ratios must be positive");
    if (config.anchors_enabled &&
        config.anchor_scale_fracs.size() * config.anchor_ratios.size() != 9)
        raise(Errc::invalid_argument, "anchors must form a 9-box grid (scales x ratios)");
    if (!(config.nms_iou > 0.0 && config.nms_iou <= 1.0))
        raise(Errc::invalid_argument, "nms_iou must lie in (0, 1]");
    if (config.min_cluster_points < 1)
        raise(Errc::invalid_argument, "min_cluster_points must be positive");
    if (config.bbox_pad_frac < 0.0)
        raise(Errc::invalid_argument, "bbox_pad_frac must be non-negative");
    if (config.kmeans_max_iters < 1 || config.kmeans_restarts < 1)
        raise(Errc::invalid_argument, "kmeans iteration and restart counts must be positive");
}

KmeansResult kmeans(const std::vector<Point>& points, int k, uint64_t seed, int max_iters,
                    int restarts) {
    if (k < 1)
        raise(Errc::invalid_argument, "K must be positive");
    if (max_iters < 1 || restarts < 1)
        raise(Errc::invalid_argument, "kmeans iteration and restart counts must be positive");
    if (points.size() < static_cast<size_t>(k))
        raise(Errc::invalid_argument, "insufficient points for K");

    LloydState best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        LloydState st = run_restart(points, k, substream_seed(seed, k, r), max_iters);
        if (!have_best || st.sse < best.sse) {
            best = std::move(st);
            have_best = true;
        }
    }

    KmeansResult result;
    result.sse = best.sse;
    result.clusters.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c)
        result.clusters[static_cast<size_t>(c)].centroid = best.centroids[static_cast<size_t>(c)];
    for (size_t i = 0; i < points.size(); ++i)
        result.clusters[static_cast<size_t>(best.assignment[i])].member_indices.push_back(
            static_cast<int>(i));
    for (Cluster& cl : result.clusters) {
        double minx = std::numeric_limits<double>::infinity(), miny = minx;
        double maxx = -minx, maxy = -minx;
        for (int idx : cl.member_indices) {
            const Point& p = points[static_cast<size_t>(idx)];
            minx = std::min(minx, p.x);
            miny = std::min(miny, p.y);
            maxx = std::max(maxx, p.x);
            maxy = std::max(maxy, p.y);
        }
        cl.tight_box = Box{minx, miny, maxx - minx, maxy - miny};
    }
    return result;
}

Box cluster_to_box(const std::vector<Point>& points, const Cluster& cluster, int frame_width,
                   int frame_height, double pad_frac) {
    if (cluster.member_indices.empty())
        raise(Errc::invalid_argument, "cluster has no members");

    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (int idx : cluster.member_indices) {
        const Point& p = points[static_cast<size_t>(idx)];
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    const double extent_w = maxx - minx;
    const double extent_h = maxy - miny;

    double pad = pad_frac * std::max(extent_w, extent_h);
    if (pad_frac > 0.0)
        pad = std::max(pad, 2.0);

    Box b{minx - pad, miny - pad, extent_w + 2.0 * pad, extent_h + 2.0 * pad};
    // Degenerate axes (single point / collinear members) get a 4 px floor
    // centered on the centroid; nonzero extents are kept as-is.
    if (b.w <= 0.0) {
        b.x = cluster.centroid.x - 2.0;
        b.w = 4.0;
    }
    if (b.h <= 0.0) {
        b.y = cluster.centroid.y - 2.0;
        b.h = 4.0;
    }

    auto clipped = clip_to_frame(b, frame_width, frame_height);
    if (!clipped)
        raise(Errc::internal, "cluster box fell outside the frame");
    return *clipped;
}

std::vector<Box> anchors_at(Point centroid, int frame_width, int frame_height,
                            const std::vector<double>& scale_fracs,
                            const std::vector<double>& ratios) {
    std::vector<Box> out;
    out.reserve(scale_fracs.size() * ratios.size());
    const double base = std::min(frame_width, frame_height);
    for (double s : scale_fracs) {
        const double area = (s * base) * (s * base);
        for (double r : ratios) {
            const double w = std::sqrt(area / r);
            const double h = r * w;
            const Box b{centroid.x - w / 2.0, centroid.y - h / 2.0, w, h};
            if (auto clipped = clip_to_frame(b, frame_width, frame_height))
                out.push_back(*clipped);
        }
    }
    return out;
}

std::vector<Proposal> nms(std::vector<Proposal> proposals, double iou_threshold) {
    // Stable sort keeps emission order as the final tie-break.
    std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.box.area() > b.box.area();
    });
    std::vector<Proposal> kept;
    for (const Proposal& p : proposals) {
        bool suppressed = false;
        for (const Proposal& q : kept) {
            if (iou(p.box, q.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed)
            kept.push_back(p);
    }
    return kept;
}

std::vector<Proposal> generate_candidates(const std::vector<Point>& points, int frame_width,
                                          int frame_height, const RpmConfig& config) {
    std::vector<Proposal> out;
    if (points.empty())
        return out;

    const double total = static_cast<double>(points.size());
    for (int k : config.k_list) {
        if (points.size() < static_cast<size_t>(k))
            continue;
        const KmeansResult km =
            kmeans(points, k, config.rng_seed, config.kmeans_max_iters, config.kmeans_restarts);

        std::vector<int> surviving;
        for (size_t c = 0; c < km.clusters.size(); ++c)
            if (km.clusters[c].member_indices.size() >=
                static_cast<size_t>(config.min_cluster_points))
                surviving.push_back(static_cast<int>(c));

        for (int c : surviving) {
            const Cluster& cl = km.clusters[static_cast<size_t>(c)];
            Proposal p;
            p.box = cluster_to_box(points, cl, frame_width, frame_height, config.bbox_pad_frac);
            p.score = cl.member_indices.size() / total;
            p.source = ProposalSource::cluster_extent;
            p.k = k;
            p.cluster_index = c;
            out.push_back(p);
        }
        if (config.anchors_enabled) {
            for (int c : surviving) {
                const Cluster& cl = km.clusters[static_cast<size_t>(c)];
                const std::vector<Box> anchors =
                    anchors_at(cl.centroid, frame_width, frame_height, config.anchor_scale_fracs,
                               config.anchor_ratios);
                for (size_t a = 0; a < anchors.size(); ++a) {
                    Proposal p;
                    p.box = anchors[a];
                    p.score = cl.member_indices.size() / total;
                    p.source = ProposalSource::anchor;
                    p.k = k;
                    p.cluster_index = c;
                    p.anchor_index = static_cast<int>(a);
                    out.push_back(p);
                }
            }
        }
    }
    return out;
}

void sort_proposals(std::vector<Proposal>& proposals) {
    std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.box.x != b.box.x)
            return a.box.x < b.box.x;
        if (a.box.y != b.box.y)
            return a.box.y < b.box.y;
        if (a.box.w != b.box.w)
            return a.box.w < b.box.w;
        if (a.box.h != b.box.h)
            return a.box.h < b.box.h;
        return a.k < b.k;
    });
}

std::vector<Point> to_points(const std::vector<tracking::WindowPoint>& window) {
    std::vector<Point> pts;
    pts.reserve(window.size());
    for (const tracking::WindowPoint& wp : window)
        pts.push_back(Point{static_cast<double>(wp.x), static_cast<double>(wp.y)});
    return pts;
}

std::vector<Proposal> generate_proposals(const tracking::MapStore& store, double t_now,
                                         int frame_width, int frame_height,
                                         const RpmConfig& config) {
    const std::vector<Point> points = to_points(store.window_points(t_now, config.window_s));
    std::vector<Proposal> proposals =
        generate_candidates(points, frame_width, frame_height, config);
    proposals = nms(std::move(proposals), config.nms_iou);
    sort_proposals(proposals);
    return proposals;
}

} // namespace rpmkit::rpm
