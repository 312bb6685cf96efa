#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

bool is_fast9_corner(const rpmkit::imaging::Frame& image, int x, int y, int threshold) {
    // Radius-3 Bresenham circle, enumerated counterclockwise from 3 o'clock
    // (deliberately a different order than any scan the detector might use;
    // run contiguity only depends on circular adjacency).
    static const int ring[16][2] = {{3, 0},  {3, -1},  {2, -2},  {1, -3}, {0, -3}, {-1, -3},
                                    {-2, -2}, {-3, -1}, {-3, 0}, {-3, 1}, {-2, 2}, {-1, 3},
                                    {0, 3},   {1, 3},   {2, 2},  {3, 1}};
    if (x < 3 || y < 3 || x >= image.width - 3 || y >= image.height - 3)
        return false;
    const int c = image.at(x, y);
    bool brighter[16], darker[16];
    for (int i = 0; i < 16; ++i) {
        const int v = image.at(x + ring[i][0], y + ring[i][1]);
        brighter[i] = v > c + threshold;
        darker[i] = v < c - threshold;
    }
    for (int start = 0; start < 16; ++start) {
        bool all_b = true, all_d = true;
        for (int len = 0; len < 9; ++len) {
            const int i = (start + len) % 16;
            all_b = all_b && brighter[i];
            all_d = all_d && darker[i];
        }
        if (all_b || all_d)
            return true;
    }
    return false;
}

double best_sse_k2(const std::vector<rpmkit::rpm::Point>& points) {
    const size_t n = points.size();
    double best = std::numeric_limits<double>::infinity();
    // Bit i of mask assigns point i; fixing point 0 to side 0 halves the
    // space. Both sides must be non-empty.
    for (uint64_t mask = 1; mask < (uint64_t{1} << (n - 1)); ++mask) {
        double sx[2] = {0, 0}, sy[2] = {0, 0};
        int cnt[2] = {0, 0};
        for (size_t i = 0; i < n; ++i) {
            const int side = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1);
            sx[side] += points[i].x;
            sy[side] += points[i].y;
            cnt[side]++;
        }
        if (cnt[0] == 0 || cnt[1] == 0)
            continue;
        const double cx[2] = {sx[0] / cnt[0], sx[1] / cnt[1]};
        const double cy[2] = {sy[0] / cnt[0], sy[1] / cnt[1]};
        double sse = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const int side = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1);
            const double dx = points[i].x - cx[side];
            const double dy = points[i].y - cy[side];
            sse += dx * dx + dy * dy;
        }
        best = std::min(best, sse);
    }
    return best;
}

double iou_rasterized(const rpmkit::Box& a, const rpmkit::Box& b, double cell) {
    const double x0 = std::min(a.x, b.x), x1 = std::max(a.x2(), b.x2());
    const double y0 = std::min(a.y, b.y), y1 = std::max(a.y2(), b.y2());
    long long in_a = 0, in_b = 0, in_both = 0;
    for (double y = y0 + cell / 2; y < y1; y += cell) {
        for (double x = x0 + cell / 2; x < x1; x += cell) {
            const bool ia = x >= a.x && x < a.x2() && y >= a.y && y < a.y2();
            const bool ib = x >= b.x && x < b.x2() && y >= b.y && y < b.y2();
            in_a += ia;
            in_b += ib;
            in_both += ia && ib;
        }
    }
    const long long uni = in_a + in_b - in_both;
    return uni > 0 ? static_cast<double>(in_both) / static_cast<double>(uni) : 0.0;
}

float orientation_direct(const rpmkit::imaging::Frame& image, int cx, int cy) {
    double m10 = 0.0, m01 = 0.0;
    for (int v = -15; v <= 15; ++v)
        for (int u = -15; u <= 15; ++u) {
            if (u * u + v * v > 225)
                continue;
            const int x = cx + u, y = cy + v;
            if (x < 0 || y < 0 || x >= image.width || y >= image.height)
                continue;
            m10 += u * image.at(x, y);
            m01 += v * image.at(x, y);
        }
    if (m10 == 0.0 && m01 == 0.0)
        return 0.0f;
    return static_cast<float>(std::atan2(m01, m10));
}

} // namespace oracle
