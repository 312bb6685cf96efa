#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "eval.hpp"
#include "imaging.hpp"

namespace rpmkit::synth {

struct SynthConfig {
    int width = 640;
    int height = 480;
    int n_frames = 300;
    int n_tools = 2; // 0..4
    int tool_size_min = 64;
    int tool_size_max = 128;
    double speed_min = 0.3; // px/frame
    double speed_max = 1.2;
    double texture_noise_sigma = 60.0; // tool texture contrast
    double background_sigma = 4.0;     // must stay below the tool sigma
    double fps = 25.0;
    uint64_t rng_seed = 0;
};

// Writes frame_%06d.pgm files, manifest.jsonl, and annotations.json into
// out_dir. Tools are rigid textured rectangles translating with constant
// velocity, reflecting at the frame borders; every byte is a function of
// rng_seed. Placement retries until all tool boxes stay pairwise disjoint
// over the whole trajectory; impossible geometry raises an error.
std::pair<imaging::FrameManifest, eval::AnnotationSet>
generate_sequence(const SynthConfig& config, const std::filesystem::path& out_dir);

} // namespace rpmkit::synth
