#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace rpmkit::synth {

namespace {

constexpr int kMaxPlacementAttempts = 1000;
constexpr double kBackgroundMean = 120.0;
constexpr double kTextureMean = 128.0;
constexpr double kTwoPi = 6.283185307179586;

uint8_t clamp_u8(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct Tool {
    int w = 0;
    int h = 0;
    std::vector<uint8_t> texture;             // row-major w*h tile
    std::vector<std::pair<int, int>> at;      // rounded top-left per frame
};

// Constant-velocity motion on [0, limit], reflecting at both ends. A zero
// limit (tool as large as the frame) pins the tool in place.
std::vector<std::pair<int, int>> simulate(double x, double y, double vx, double vy,
                                          double limit_x, double limit_y, int n_frames) {
    if (limit_x <= 0.0) {
        x = 0.0;
        vx = 0.0;
    }
    if (limit_y <= 0.0) {
        y = 0.0;
        vy = 0.0;
    }
    std::vector<std::pair<int, int>> at;
    at.reserve(static_cast<size_t>(n_frames));
    for (int f = 0; f < n_frames; ++f) {
        at.emplace_back(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)));
        x += vx;
        y += vy;
        while (x < 0.0 || x > limit_x) {
            if (x < 0.0)
                x = -x;
            else
                x = 2.0 * limit_x - x;
            vx = -vx;
        }
        while (y < 0.0 || y > limit_y) {
            if (y < 0.0)
                y = -y;
            else
                y = 2.0 * limit_y - y;
            vy = -vy;
        }
    }
    return at;
}

bool disjoint_everywhere(const Tool& a, const Tool& b, int n_frames) {
    for (int f = 0; f < n_frames; ++f) {
        const auto [ax, ay] = a.at[static_cast<size_t>(f)];
        const auto [bx, by] = b.at[static_cast<size_t>(f)];
        const bool apart = ax + a.w <= bx || bx + b.w <= ax || ay + a.h <= by || by + b.h <= ay;
        if (!apart)
            return false;
    }
    return true;
}

void validate(const SynthConfig& c) {
    if (c.width < imaging::kMinFrameDim || c.height < imaging::kMinFrameDim)
        raise(Errc::invalid_argument, "frame below minimum size");
    if (c.n_frames < 1)
        raise(Errc::invalid_argument, "frame count must be positive");
    if (c.n_tools < 0 || c.n_tools > 4)
        raise(Errc::invalid_argument, "tool count must be between 0 and 4");
    if (c.tool_size_min < 1 || c.tool_size_max < c.tool_size_min)
        raise(Errc::invalid_argument, "invalid tool size range");
    if (c.speed_min < 0.0 || c.speed_max < c.speed_min)
        raise(Errc::invalid_argument, "invalid speed range");
    if (!(c.background_sigma < c.texture_noise_sigma))
        raise(Errc::invalid_argument, "background sigma must be below texture sigma");
    if (!(c.fps > 0.0))
        raise(Errc::invalid_argument, "fps must be positive");
}

} // namespace

std::pair<imaging::FrameManifest, eval::AnnotationSet>
generate_sequence(const SynthConfig& config, const std::filesystem::path& out_dir) {
    validate(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        raise(Errc::io, "cannot create output directory: " + out_dir.string());

    // One sequential stream defines every output byte. Draw order: static
    // background, then per tool its size, texture tile, and placement
    // attempts (position, speed, heading).
    SplitMix64 rng(config.rng_seed);

    const size_t n_px = static_cast<size_t>(config.width) * config.height;
    std::vector<uint8_t> background(n_px);
    for (uint8_t& px : background)
        px = clamp_u8(kBackgroundMean + config.background_sigma * rng.gaussian());

    std::vector<Tool> tools;
    for (int i = 0; i < config.n_tools; ++i) {
        Tool tool;
        tool.w = static_cast<int>(rng.uniform_int(config.tool_size_min, config.tool_size_max));
        tool.h = static_cast<int>(rng.uniform_int(config.tool_size_min, config.tool_size_max));
        if (tool.w > config.width || tool.h > config.height)
            raise(Errc::unsatisfiable, "unsatisfiable geometry: tool larger than frame");
        tool.texture.resize(static_cast<size_t>(tool.w) * tool.h);
        for (uint8_t& px : tool.texture)
            px = clamp_u8(kTextureMean + config.texture_noise_sigma * rng.gaussian());

        const double limit_x = config.width - tool.w;
        const double limit_y = config.height - tool.h;
        bool placed = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
            const double x = rng.uniform_range(0.0, limit_x);
            const double y = rng.uniform_range(0.0, limit_y);
            const double speed = rng.uniform_range(config.speed_min, config.speed_max);
            const double heading = rng.uniform_range(0.0, kTwoPi);
            tool.at = simulate(x, y, speed * std::cos(heading), speed * std::sin(heading),
                               limit_x, limit_y, config.n_frames);
            placed = true;
            for (const Tool& other : tools)
                if (!disjoint_everywhere(tool, other, config.n_frames)) {
                    placed = false;
                    break;
                }
        }
        if (!placed)
            raise(Errc::unsatisfiable,
                  "unsatisfiable geometry: could not place tools disjointly");
        tools.push_back(std::move(tool));
    }

    imaging::FrameManifest manifest;
    manifest.base_dir = out_dir.string();
    eval::AnnotationSet gt;
    for (int i = 0; i < config.n_tools; ++i)
        gt.categories.push_back({i + 1, "tool_" + std::to_string(i + 1)});

    std::ofstream mf(out_dir / "manifest.jsonl", std::ios::binary);
    if (!mf)
        raise(Errc::io, "cannot write manifest: " + (out_dir / "manifest.jsonl").string());

    imaging::Frame frame;
    frame.width = config.width;
    frame.height = config.height;
    int64_t next_annotation_id = 1;
    for (int f = 0; f < config.n_frames; ++f) {
        frame.frame_id = f;
        frame.timestamp_s = f / config.fps;
        frame.pixels = background;
        for (const Tool& tool : tools) {
            const auto [tx, ty] = tool.at[static_cast<size_t>(f)];
            for (int row = 0; row < tool.h; ++row)
                std::copy_n(tool.texture.begin() + static_cast<size_t>(row) * tool.w, tool.w,
                            frame.pixels.begin() +
                                static_cast<size_t>(ty + row) * config.width + tx);
        }

        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.pgm", f);
        imaging::write_pgm((out_dir / name).string(), frame);

        char line[160];
        std::snprintf(line, sizeof(line),
                      "{\"frame_id\": %d, \"timestamp_s\": %.6f, \"path\": \"%s\"}\n", f,
                      frame.timestamp_s, name);
        mf << line;
        manifest.entries.push_back({f, frame.timestamp_s, name});

        gt.images.push_back({f, f, config.width, config.height});
        for (size_t t = 0; t < tools.size(); ++t) {
            const Tool& tool = tools[t];
            const auto [tx, ty] = tool.at[static_cast<size_t>(f)];
            gt.annotations.push_back({next_annotation_id++, f, static_cast<int>(t) + 1,
                                      Box{static_cast<double>(tx), static_cast<double>(ty),
                                          static_cast<double>(tool.w),
                                          static_cast<double>(tool.h)}});
        }
    }
    mf.close();

    eval::save_coco(gt, out_dir / "annotations.json");
    return {std::move(manifest), std::move(gt)};
}

} // namespace rpmkit::synth
