#pragma once

#include <cstdint>
#include <filesystem>

#include "eval.hpp"
#include "geometry.hpp"
#include "imaging.hpp"
#include "proposal_io.hpp"

namespace rpmkit::render {

// 1-px axis-aligned rectangle outline; parts outside the frame are clipped.
void draw_box_outline(imaging::Frame& frame, const Box& box, uint8_t intensity);

constexpr uint8_t kProposalIntensity = 255;
constexpr uint8_t kGroundTruthIntensity = 128;

// Writes overlay_%06d.<format> per manifest frame into out_dir; proposals at
// intensity 255, optional ground truth at 128. format is "png" or "pgm".
void render_overlays(const imaging::FrameManifest& manifest,
                     const std::vector<rpm::FrameProposals>& proposals,
                     const eval::AnnotationSet* ground_truth,
                     const std::filesystem::path& out_dir, const std::string& format);

} // namespace rpmkit::render
