#include "features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace rpmkit::features {

void validate_config(const DetectorConfig& config) {
    if (config.max_keypoints < 1)
        raise(Errc::invalid_argument, "max_keypoints must be positive");
    if (config.fast_threshold < 1 || config.fast_threshold > 254)
        raise(Errc::invalid_argument, "fast_threshold must lie in [1, 254]");
    if (!(config.scale_factor > 1.0))
        raise(Errc::invalid_argument, "scale_factor must exceed 1");
    if (config.n_levels < 1)
        raise(Errc::invalid_argument, "n_levels must be positive");
    if (config.grid_cells < 1)
        raise(Errc::invalid_argument, "grid_cells must be positive");
}

namespace {

// radius-3 Bresenham circle, clockwise from 12 o'clock
constexpr int kCircleX[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleY[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
constexpr int kArcLen = 9;

// Longest circular run of set flags; returns (length, start index).
std::pair<int, int> longest_run(const bool flags[16]) {
    int best_len = 0, best_start = 0;
    int len = 0;
    for (int i = 0; i < 32; ++i) {
        if (flags[i & 15]) {
            ++len;
            if (len > best_len) {
                best_len = len;
                best_start = i - len + 1;
            }
            if (len == 16)
                break;
        } else {
            len = 0;
        }
    }
    return {std::min(best_len, 16), ((best_start % 16) + 16) % 16};
}

} // namespace

std::vector<Candidate> detect_fast(const imaging::Frame& img, int threshold) {
    std::vector<Candidate> out;
    const int w = img.width;
    const int h = img.height;
    if (w < 2 * kFastMargin + 1 || h < 2 * kFastMargin + 1)
        return out;

    int offs[16];
    for (int i = 0; i < 16; ++i)
        offs[i] = kCircleY[i] * w + kCircleX[i];

    std::vector<uint16_t> response(static_cast<size_t>(w) * h, 0);
    std::vector<Candidate> raw;
    const uint8_t* data = img.pixels.data();

    for (int y = kFastMargin; y < h - kFastMargin; ++y) {
        const uint8_t* row = data + static_cast<size_t>(y) * w;
        for (int x = kFastMargin; x < w - kFastMargin; ++x) {
            const uint8_t* p = row + x;
            const int c = *p;
            const int lo = c - threshold;
            const int hi = c + threshold;

            // a 9-run must contain pixel 0 or 8, and pixel 4 or 12
            const int v0 = p[offs[0]], v8 = p[offs[8]];
            const int v4 = p[offs[4]], v12 = p[offs[12]];
            const bool bright_possible = (v0 > hi || v8 > hi) && (v4 > hi || v12 > hi);
            const bool dark_possible = (v0 < lo || v8 < lo) && (v4 < lo || v12 < lo);
            if (!bright_possible && !dark_possible)
                continue;

            int vals[16];
            bool bright[16], dark[16];
            for (int i = 0; i < 16; ++i) {
                vals[i] = p[offs[i]];
                bright[i] = vals[i] > hi;
                dark[i] = vals[i] < lo;
            }

            int score = 0;
            if (bright_possible) {
                auto [len, start] = longest_run(bright);
                if (len >= kArcLen) {
                    for (int i = 0; i < len; ++i)
                        score += vals[(start + i) & 15] - c;
                }
            }
            if (score == 0 && dark_possible) {
                auto [len, start] = longest_run(dark);
                if (len >= kArcLen) {
                    for (int i = 0; i < len; ++i)
                        score += c - vals[(start + i) & 15];
                }
            }
            if (score == 0)
                continue;

            response[static_cast<size_t>(y) * w + x] = static_cast<uint16_t>(score);
            raw.push_back(Candidate{static_cast<float>(x), static_cast<float>(y), x, y, 0,
                                    static_cast<float>(score)});
        }
    }

    // 3x3 NMS; equal responses resolved in favor of the raster-first pixel
    out.reserve(raw.size());
    for (const Candidate& cand : raw) {
        const uint16_t r = response[static_cast<size_t>(cand.ly) * w + cand.lx];
        bool keep = true;
        for (int dy = -1; dy <= 1 && keep; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0)
                    continue;
                const uint16_t rn =
                    response[static_cast<size_t>(cand.ly + dy) * w + (cand.lx + dx)];
                if (rn > r || (rn == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                    keep = false;
                    break;
                }
            }
        }
        if (keep)
            out.push_back(cand);
    }
    return out;
}

std::vector<Candidate> retain_by_grid(const std::vector<Candidate>& candidates,
                                      const DetectorConfig& config, int width, int height) {
    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.response != b.response)
            return a.response > b.response;
        if (a.y != b.y)
            return a.y < b.y;
        return a.x < b.x;
    };

    const int g = std::max(1, config.grid_cells);
    const int buckets = g * g;
    const int quota = (config.max_keypoints + buckets - 1) / buckets;
    const double cell_w = static_cast<double>(width) / g;
    const double cell_h = static_cast<double>(height) / g;

    std::vector<std::vector<Candidate>> bucketed(static_cast<size_t>(buckets));
    for (const Candidate& c : candidates) {
        int bx = std::min(g - 1, static_cast<int>(c.x / cell_w));
        int by = std::min(g - 1, static_cast<int>(c.y / cell_h));
        bx = std::max(0, bx);
        by = std::max(0, by);
        bucketed[static_cast<size_t>(by) * g + bx].push_back(c);
    }

    std::vector<Candidate> kept;
    for (auto& bucket : bucketed) {
        std::sort(bucket.begin(), bucket.end(), better);
        const size_t take = std::min(bucket.size(), static_cast<size_t>(quota));
        kept.insert(kept.end(), bucket.begin(), bucket.begin() + take);
    }
    if (static_cast<int>(kept.size()) > config.max_keypoints) {
        std::sort(kept.begin(), kept.end(), better);
        kept.resize(static_cast<size_t>(config.max_keypoints));
    }

    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        if (a.y != b.y)
            return a.y < b.y;
        if (a.x != b.x)
            return a.x < b.x;
        return a.level < b.level;
    });
    return kept;
}

float compute_orientation(const imaging::Frame& img, int x, int y) {
    constexpr int r = 15;
    int64_t m10 = 0, m01 = 0;
    for (int v = -r; v <= r; ++v) {
        const uint8_t* row = img.pixels.data() + static_cast<size_t>(y + v) * img.width + x;
        for (int u = -r; u <= r; ++u) {
            if (u * u + v * v > r * r)
                continue;
            const int val = row[u];
            m10 += static_cast<int64_t>(u) * val;
            m01 += static_cast<int64_t>(v) * val;
        }
    }
    if (m10 == 0 && m01 == 0)
        return 0.0f;
    return static_cast<float>(std::atan2(static_cast<double>(m01), static_cast<double>(m10)));
}

const std::array<PatternPair, 256>& descriptor_pattern() {
    static const std::array<PatternPair, 256> pattern = [] {
        std::array<PatternPair, 256> p{};
        SplitMix64 rng(20160527u);
        auto draw = [&rng]() { return static_cast<int8_t>(static_cast<int>(rng.next() % 27) - 13); };
        for (auto& pair : p) {
            pair.px = draw();
            pair.py = draw();
            do {
                pair.qx = draw();
                pair.qy = draw();
            } while (pair.qx == pair.px && pair.qy == pair.py);
        }
        return p;
    }();
    return pattern;
}

namespace {

// summed-area table with a one-cell border of zeros
struct Integral {
    std::vector<uint32_t> sums;
    int width = 0;
    int height = 0;

    explicit Integral(const imaging::Frame& img) : width(img.width), height(img.height) {
        sums.assign(static_cast<size_t>(width + 1) * (height + 1), 0);
        for (int y = 0; y < height; ++y) {
            uint32_t row_sum = 0;
            const uint8_t* row = img.pixels.data() + static_cast<size_t>(y) * width;
            uint32_t* out = sums.data() + static_cast<size_t>(y + 1) * (width + 1);
            const uint32_t* prev = sums.data() + static_cast<size_t>(y) * (width + 1);
            for (int x = 0; x < width; ++x) {
                row_sum += row[x];
                out[x + 1] = prev[x + 1] + row_sum;
            }
        }
    }

    // sum over the 5x5 window centered at (x, y); window must be in-bounds
    uint32_t box5(int x, int y) const {
        const int x0 = x - 2, y0 = y - 2, x1 = x + 3, y1 = y + 3;
        const size_t stride = static_cast<size_t>(width + 1);
        return sums[static_cast<size_t>(y1) * stride + x1] -
               sums[static_cast<size_t>(y0) * stride + x1] -
               sums[static_cast<size_t>(y1) * stride + x0] +
               sums[static_cast<size_t>(y0) * stride + x0];
    }
};

std::optional<Descriptor> descriptor_from_integral(const Integral& integral, int x, int y,
                                                   float orientation_rad) {
    const double c = std::cos(static_cast<double>(orientation_rad));
    const double s = std::sin(static_cast<double>(orientation_rad));
    const auto& pattern = descriptor_pattern();

    Descriptor desc{};
    for (int i = 0; i < 256; ++i) {
        const PatternPair& pp = pattern[static_cast<size_t>(i)];
        const int pxr = static_cast<int>(std::lround(pp.px * c - pp.py * s));
        const int pyr = static_cast<int>(std::lround(pp.px * s + pp.py * c));
        const int qxr = static_cast<int>(std::lround(pp.qx * c - pp.qy * s));
        const int qyr = static_cast<int>(std::lround(pp.qx * s + pp.qy * c));

        const int px = x + pxr, py = y + pyr;
        const int qx = x + qxr, qy = y + qyr;
        if (px < 2 || py < 2 || qx < 2 || qy < 2 || px >= integral.width - 2 ||
            py >= integral.height - 2 || qx >= integral.width - 2 || qy >= integral.height - 2)
            return std::nullopt;

        if (integral.box5(px, py) < integral.box5(qx, qy))
            desc[static_cast<size_t>(i) >> 6] |= 1ULL << (i & 63);
    }
    return desc;
}

} // namespace

std::optional<Descriptor> compute_descriptor(const imaging::Frame& img, int x, int y,
                                              float orientation_rad) {
    Integral integral(img);
    return descriptor_from_integral(integral, x, y, orientation_rad);
}

int hamming_distance(const Descriptor& a, const Descriptor& b) {
    int d = 0;
    for (size_t i = 0; i < a.size(); ++i)
        d += std::popcount(a[i] ^ b[i]);
    return d;
}

std::vector<Match> match_descriptors(const std::vector<Descriptor>& set_a,
                                     const std::vector<Descriptor>& set_b) {
    constexpr int kAbsGate = 64;
    constexpr double kRatio = 0.8;

    std::vector<Match> out;
    if (set_a.empty() || set_b.empty())
        return out;

    std::vector<int> best_a_for_b(set_b.size(), -1);
    std::vector<int> best_dist_for_b(set_b.size(), std::numeric_limits<int>::max());

    struct Forward {
        int best = std::numeric_limits<int>::max();
        int second = std::numeric_limits<int>::max();
        int best_idx = -1;
    };
    std::vector<Forward> fwd(set_a.size());

    for (size_t ia = 0; ia < set_a.size(); ++ia) {
        for (size_t ib = 0; ib < set_b.size(); ++ib) {
            const int d = hamming_distance(set_a[ia], set_b[ib]);
            Forward& f = fwd[ia];
            if (d < f.best) {
                f.second = f.best;
                f.best = d;
                f.best_idx = static_cast<int>(ib);
            } else if (d < f.second) {
                f.second = d;
            }
            if (d < best_dist_for_b[ib]) {
                best_dist_for_b[ib] = d;
                best_a_for_b[ib] = static_cast<int>(ia);
            }
        }
    }

    for (size_t ia = 0; ia < set_a.size(); ++ia) {
        const Forward& f = fwd[ia];
        if (f.best_idx < 0 || f.best > kAbsGate)
            continue;
        if (f.second != std::numeric_limits<int>::max() &&
            !(static_cast<double>(f.best) < kRatio * static_cast<double>(f.second)))
            continue;
        if (best_a_for_b[static_cast<size_t>(f.best_idx)] != static_cast<int>(ia))
            continue;
        out.push_back(Match{static_cast<int>(ia), f.best_idx, f.best});
    }
    return out;
}

std::vector<KeyPoint> detect_keypoints(const imaging::ImagePyramid& pyramid,
                                       const DetectorConfig& config) {
    const imaging::Frame& base = pyramid.levels.front();
    std::vector<Candidate> pooled;

    for (size_t level = 0; level < pyramid.levels.size(); ++level) {
        const imaging::Frame& img = pyramid.levels[level];
        const double scale = std::pow(pyramid.scale_factor, static_cast<double>(level));
        std::vector<Candidate> cands = detect_fast(img, config.fast_threshold);
        for (Candidate& c : cands) {
            if (c.lx < kDetectMargin || c.ly < kDetectMargin || c.lx >= img.width - kDetectMargin ||
                c.ly >= img.height - kDetectMargin)
                continue;
            c.level = static_cast<int>(level);
            c.x = static_cast<float>(c.lx * scale);
            c.y = static_cast<float>(c.ly * scale);
            pooled.push_back(c);
        }
    }

    std::vector<Candidate> retained = retain_by_grid(pooled, config, base.width, base.height);

    // group by level so each integral image is built once
    std::vector<KeyPoint> keypoints(retained.size());
    std::vector<char> valid(retained.size(), 0);
    for (size_t level = 0; level < pyramid.levels.size(); ++level) {
        bool any = false;
        for (const Candidate& c : retained) {
            if (c.level == static_cast<int>(level)) {
                any = true;
                break;
            }
        }
        if (!any)
            continue;
        const imaging::Frame& img = pyramid.levels[level];
        Integral integral(img);
        for (size_t i = 0; i < retained.size(); ++i) {
            const Candidate& c = retained[i];
            if (c.level != static_cast<int>(level))
                continue;
            const float angle = compute_orientation(img, c.lx, c.ly);
            auto desc = descriptor_from_integral(integral, c.lx, c.ly, angle);
            if (!desc)
                continue;
            keypoints[i] = KeyPoint{c.x, c.y, c.level, c.response, angle, *desc};
            valid[i] = 1;
        }
    }

    std::vector<KeyPoint> out;
    out.reserve(keypoints.size());
    for (size_t i = 0; i < keypoints.size(); ++i)
        if (valid[i])
            out.push_back(keypoints[i]);
    return out;
}

} // namespace rpmkit::features
