#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "error.hpp"

namespace rpmkit::render {

namespace {

void hline(imaging::Frame& frame, int x0, int x1, int y, uint8_t v) {
    if (y < 0 || y >= frame.height)
        return;
    x0 = std::max(x0, 0);
    x1 = std::min(x1, frame.width - 1);
    for (int x = x0; x <= x1; ++x)
        frame.at(x, y) = v;
}

void vline(imaging::Frame& frame, int x, int y0, int y1, uint8_t v) {
    if (x < 0 || x >= frame.width)
        return;
    y0 = std::max(y0, 0);
    y1 = std::min(y1, frame.height - 1);
    for (int y = y0; y <= y1; ++y)
        frame.at(x, y) = v;
}

} // namespace

void draw_box_outline(imaging::Frame& frame, const Box& box, uint8_t intensity) {
    const int x0 = static_cast<int>(std::lround(box.x));
    const int y0 = static_cast<int>(std::lround(box.y));
    const int x1 = static_cast<int>(std::lround(box.x2())) - 1;
    const int y1 = static_cast<int>(std::lround(box.y2())) - 1;
    if (x1 < x0 || y1 < y0)
        return;
    hline(frame, x0, x1, y0, intensity);
    hline(frame, x0, x1, y1, intensity);
    vline(frame, x0, y0, y1, intensity);
    vline(frame, x1, y0, y1, intensity);
}

void render_overlays(const imaging::FrameManifest& manifest,
                     const std::vector<rpm::FrameProposals>& proposals,
                     const eval::AnnotationSet* ground_truth,
                     const std::filesystem::path& out_dir, const std::string& format) {
    if (format != "png" && format != "pgm")
        raise(Errc::invalid_argument, "overlay format must be png or pgm");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        raise(Errc::io, "cannot create output directory: " + out_dir.string());

    std::unordered_map<int64_t, const rpm::FrameProposals*> by_frame;
    for (const rpm::FrameProposals& rec : proposals)
        by_frame[rec.frame_id] = &rec;
    std::unordered_map<int64_t, std::vector<const Box*>> gt_by_frame;
    if (ground_truth) {
        std::unordered_map<int64_t, int64_t> frame_of_image;
        for (const eval::CocoImage& img : ground_truth->images)
            frame_of_image[img.id] = img.frame_id;
        for (const eval::CocoAnnotation& ann : ground_truth->annotations)
            gt_by_frame[frame_of_image.at(ann.image_id)].push_back(&ann.box);
    }

    for (const imaging::ManifestEntry& entry : manifest.entries) {
        imaging::Frame frame = imaging::load_frame(manifest, entry);
        if (auto it = gt_by_frame.find(entry.frame_id); it != gt_by_frame.end())
            for (const Box* b : it->second)
                draw_box_outline(frame, *b, kGroundTruthIntensity);
        if (auto it = by_frame.find(entry.frame_id); it != by_frame.end())
            for (const rpm::Proposal& p : it->second->proposals)
                draw_box_outline(frame, p.box, kProposalIntensity);

        char name[48];
        std::snprintf(name, sizeof(name), "overlay_%06lld.%s",
                      static_cast<long long>(entry.frame_id), format.c_str());
        const std::string path = (out_dir / name).string();
        if (format == "png")
            imaging::write_png_gray(path, frame);
        else
            imaging::write_pgm(path, frame);
    }
}

} // namespace rpmkit::render
