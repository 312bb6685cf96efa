#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "imaging.hpp"
#include "rng.hpp"

namespace testutil {

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("rpmkit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

inline rpmkit::imaging::Frame constant_frame(int width, int height, uint8_t value,
                                             int64_t frame_id = 0, double timestamp_s = 0.0) {
    rpmkit::imaging::Frame f;
    f.frame_id = frame_id;
    f.timestamp_s = timestamp_s;
    f.width = width;
    f.height = height;
    f.pixels.assign(static_cast<size_t>(width) * height, value);
    return f;
}

inline rpmkit::imaging::Frame noise_frame(int width, int height, uint64_t seed,
                                          int64_t frame_id = 0, double timestamp_s = 0.0) {
    rpmkit::imaging::Frame f = constant_frame(width, height, 0, frame_id, timestamp_s);
    rpmkit::SplitMix64 rng(seed);
    for (uint8_t& p : f.pixels)
        p = static_cast<uint8_t>(rng.uniform_below(256));
    return f;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace testutil
