#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rpmkit::imaging {

constexpr int kMinFrameDim = 32;

// Row-major 8-bit grayscale image with sequence identity.
struct Frame {
    int64_t frame_id = 0;
    double timestamp_s = 0.0;
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Level 0 is the original frame; level k has dimensions
// floor(original / scale_factor^k).
struct ImagePyramid {
    std::vector<Frame> levels;
    double scale_factor = 1.0;
};

struct ManifestEntry {
    int64_t frame_id = 0;
    double timestamp_s = 0.0;
    std::string path; // resolved against the manifest's directory
};

struct FrameManifest {
    std::vector<ManifestEntry> entries;
    std::string base_dir;
};

// Line-delimited records {"frame_id":, "timestamp_s":, "path":}. Entries must
// be sorted by frame_id with strictly increasing timestamps. An empty file is
// a valid empty manifest.
FrameManifest load_manifest(const std::string& path);

// Entry path joined onto the manifest directory (absolute paths untouched).
std::string resolved_path(const FrameManifest& manifest, const ManifestEntry& entry);

// Reads a binary PGM (P5, maxval 255) or an 8-bit PNG (gray or RGB; color is
// converted by luma weights 0.299/0.587/0.114, rounded to nearest).
Frame load_frame(const FrameManifest& manifest, const ManifestEntry& entry);
Frame load_image(const std::string& path, int64_t frame_id, double timestamp_s);

void write_pgm(const std::string& path, const Frame& frame);
void write_png_gray(const std::string& path, const Frame& frame);

Frame downsample_bilinear(const Frame& src, int dst_width, int dst_height);

ImagePyramid build_pyramid(const Frame& frame, double scale_factor, int n_levels);

// floor(original / scale_factor^level), shared with keypoint rescaling
int level_dim(int original, double scale_factor, int level);

} // namespace rpmkit::imaging
