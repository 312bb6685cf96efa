#include "imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <png.h>

#include "error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rpmkit::imaging {

FrameManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io, "cannot open manifest: " + path);

    FrameManifest manifest;
    manifest.base_dir = fs::path(path).parent_path().string();

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            raise(Errc::format, path + ": malformed line " + std::to_string(line_no) + ": " + e.what());
        }
        ManifestEntry entry;
        try {
            entry.frame_id = rec.at("frame_id").get<int64_t>();
            entry.timestamp_s = rec.at("timestamp_s").get<double>();
            entry.path = rec.at("path").get<std::string>();
        } catch (const json::exception& e) {
            raise(Errc::format, path + ": malformed line " + std::to_string(line_no) + ": " + e.what());
        }
        if (entry.frame_id < 0 || entry.timestamp_s < 0.0)
            raise(Errc::format, path + ": malformed line " + std::to_string(line_no) +
                                    ": negative frame_id or timestamp");
        if (!manifest.entries.empty()) {
            if (entry.frame_id <= manifest.entries.back().frame_id)
                raise(Errc::format,
                      path + ": frame ids not sorted at line " + std::to_string(line_no));
            if (entry.timestamp_s <= manifest.entries.back().timestamp_s)
                raise(Errc::format,
                      path + ": non-monotonic timestamp at line " + std::to_string(line_no));
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

namespace {

void skip_pgm_space(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in.get();
        } else {
            return;
        }
    }
}

Frame load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(Errc::io, "cannot open image: " + path);

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        raise(Errc::format, path + ": not a binary PGM (P5)");

    int width = 0, height = 0, maxval = 0;
    skip_pgm_space(in);
    in >> width;
    skip_pgm_space(in);
    in >> height;
    skip_pgm_space(in);
    in >> maxval;
    if (!in || width <= 0 || height <= 0)
        raise(Errc::format, path + ": bad PGM header");
    if (maxval != 255)
        raise(Errc::format, path + ": unsupported PGM maxval " + std::to_string(maxval));
    in.get(); // single whitespace after maxval

    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.pixels.resize(static_cast<size_t>(width) * height);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
    if (static_cast<size_t>(in.gcount()) != frame.pixels.size())
        raise(Errc::format, path + ": truncated PGM pixel data");
    return frame;
}

uint8_t luma(uint8_t r, uint8_t g, uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<uint8_t>(std::lround(y));
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;
    ~PngReadCloser() {
        if (png)
            png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (file)
            std::fclose(file);
    }
};

Frame load_png(const std::string& path) {
    PngReadCloser ctx;
    ctx.file = std::fopen(path.c_str(), "rb");
    if (!ctx.file)
        raise(Errc::io, "cannot open image: " + path);

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png)
        raise(Errc::internal, "png_create_read_struct failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info)
        raise(Errc::internal, "png_create_info_struct failed");

    if (setjmp(png_jmpbuf(ctx.png)))
        raise(Errc::format, path + ": PNG decode error");

    png_init_io(ctx.png, ctx.file);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color_type = png_get_color_type(ctx.png, ctx.info);

    if (bit_depth == 16)
        raise(Errc::format, path + ": unsupported 16-bit PNG");
    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(ctx.png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS))
        png_set_strip_alpha(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const int channels = png_get_channels(ctx.png, ctx.info);
    if (channels != 1 && channels != 3)
        raise(Errc::format, path + ": unsupported PNG channel layout");

    std::vector<uint8_t> row(static_cast<size_t>(width) * channels);
    std::vector<png_bytep> rows(height);
    std::vector<uint8_t> raw(static_cast<size_t>(width) * height * channels);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = raw.data() + static_cast<size_t>(y) * width * channels;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    Frame frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.pixels.resize(static_cast<size_t>(width) * height);
    if (channels == 1) {
        std::copy(raw.begin(), raw.end(), frame.pixels.begin());
    } else {
        for (size_t i = 0; i < frame.pixels.size(); ++i)
            frame.pixels[i] = luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    }
    return frame;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size())
        return false;
    std::string tail = s.substr(s.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail == suffix;
}

} // namespace

Frame load_image(const std::string& path, int64_t frame_id, double timestamp_s) {
    Frame frame;
    if (has_suffix(path, ".pgm")) {
        frame = load_pgm(path);
    } else if (has_suffix(path, ".png")) {
        frame = load_png(path);
    } else {
        raise(Errc::format, path + ": unsupported image format (want .pgm or .png)");
    }
    if (frame.width < kMinFrameDim || frame.height < kMinFrameDim)
        raise(Errc::format, path + ": frame below minimum size " + std::to_string(kMinFrameDim) +
                                "x" + std::to_string(kMinFrameDim));
    frame.frame_id = frame_id;
    frame.timestamp_s = timestamp_s;
    return frame;
}

std::string resolved_path(const FrameManifest& manifest, const ManifestEntry& entry) {
    fs::path p(entry.path);
    if (p.is_absolute() || manifest.base_dir.empty())
        return entry.path;
    return (fs::path(manifest.base_dir) / p).string();
}

Frame load_frame(const FrameManifest& manifest, const ManifestEntry& entry) {
    return load_image(resolved_path(manifest, entry), entry.frame_id, entry.timestamp_s);
}

void write_pgm(const std::string& path, const Frame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        raise(Errc::io, "cannot write image: " + path);
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
    if (!out)
        raise(Errc::io, "short write: " + path);
}

namespace {

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;
    ~PngWriteCloser() {
        if (png)
            png_destroy_write_struct(&png, info ? &info : nullptr);
        if (file)
            std::fclose(file);
    }
};

} // namespace

void write_png_gray(const std::string& path, const Frame& frame) {
    PngWriteCloser ctx;
    ctx.file = std::fopen(path.c_str(), "wb");
    if (!ctx.file)
        raise(Errc::io, "cannot write image: " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png)
        raise(Errc::internal, "png_create_write_struct failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info)
        raise(Errc::internal, "png_create_info_struct failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        raise(Errc::io, path + ": PNG encode error");

    png_init_io(ctx.png, ctx.file);
    png_set_IHDR(ctx.png, ctx.info, frame.width, frame.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < frame.height; ++y)
        png_write_row(ctx.png,
                      const_cast<png_bytep>(frame.pixels.data() + static_cast<size_t>(y) * frame.width));
    png_write_end(ctx.png, nullptr);
}

int level_dim(int original, double scale_factor, int level) {
    return static_cast<int>(std::floor(original / std::pow(scale_factor, level)));
}

Frame downsample_bilinear(const Frame& src, int dst_width, int dst_height) {
    Frame dst;
    dst.frame_id = src.frame_id;
    dst.timestamp_s = src.timestamp_s;
    dst.width = dst_width;
    dst.height = dst_height;
    dst.pixels.resize(static_cast<size_t>(dst_width) * dst_height);

    const double ratio_x = static_cast<double>(src.width) / dst_width;
    const double ratio_y = static_cast<double>(src.height) / dst_height;

    for (int j = 0; j < dst_height; ++j) {
        double sy = (j + 0.5) * ratio_y - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - y0;
        for (int i = 0; i < dst_width; ++i) {
            double sx = (i + 0.5) * ratio_x - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - x0;
            const double top = src.at(x0, y0) * (1.0 - fx) + src.at(x1, y0) * fx;
            const double bot = src.at(x0, y1) * (1.0 - fx) + src.at(x1, y1) * fx;
            const double v = top * (1.0 - fy) + bot * fy;
            dst.pixels[static_cast<size_t>(j) * dst_width + i] =
                static_cast<uint8_t>(std::lround(v));
        }
    }
    return dst;
}

ImagePyramid build_pyramid(const Frame& frame, double scale_factor, int n_levels) {
    if (scale_factor <= 1.0)
        raise(Errc::invalid_argument, "scale_factor must be > 1");
    if (n_levels < 1)
        raise(Errc::invalid_argument, "n_levels must be >= 1");
    if (level_dim(frame.width, scale_factor, n_levels - 1) < 16 ||
        level_dim(frame.height, scale_factor, n_levels - 1) < 16)
        raise(Errc::invalid_argument, "too many levels for the frame size");

    ImagePyramid pyr;
    pyr.scale_factor = scale_factor;
    pyr.levels.reserve(static_cast<size_t>(n_levels));
    pyr.levels.push_back(frame);
    for (int k = 1; k < n_levels; ++k) {
        const int w = level_dim(frame.width, scale_factor, k);
        const int h = level_dim(frame.height, scale_factor, k);
        pyr.levels.push_back(downsample_bilinear(pyr.levels.back(), w, h));
    }
    return pyr;
}

} // namespace rpmkit::imaging
