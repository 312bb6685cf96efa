#include "pipeline.hpp"

#include <chrono>
#include <ostream>

#include "proposal_io.hpp"

namespace rpmkit::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

std::vector<rpm::Proposal> ProposalPipeline::process(const imaging::Frame& frame,
                                                     StageTimes* times) {
    const auto t_start = Clock::now();

    auto t0 = Clock::now();
    const imaging::ImagePyramid pyramid =
        imaging::build_pyramid(frame, detector_.scale_factor, detector_.n_levels);
    const std::vector<features::KeyPoint> keypoints =
        features::detect_keypoints(pyramid, detector_);
    const double detect_ms = ms_since(t0);

    t0 = Clock::now();
    const double tracked_ratio = store_.process_frame(frame, keypoints);
    if (store_.should_insert_keyframe(tracked_ratio, frame.frame_id))
        store_.insert_keyframe(frame);
    const double track_ms = ms_since(t0);

    t0 = Clock::now();
    const std::vector<rpm::Point> points =
        rpm::to_points(store_.window_points(frame.timestamp_s, rpm_.window_s));
    std::vector<rpm::Proposal> proposals =
        rpm::generate_candidates(points, frame.width, frame.height, rpm_);
    const double cluster_ms = ms_since(t0);

    t0 = Clock::now();
    proposals = rpm::nms(std::move(proposals), rpm_.nms_iou);
    rpm::sort_proposals(proposals);
    const double nms_ms = ms_since(t0);

    if (times) {
        times->detect_ms = detect_ms;
        times->track_ms = track_ms;
        times->cluster_ms = cluster_ms;
        times->nms_ms = nms_ms;
        times->total_ms = ms_since(t_start);
    }
    return proposals;
}

void propose_manifest(const imaging::FrameManifest& manifest,
                      const features::DetectorConfig& detector, const rpm::RpmConfig& rpm,
                      std::ostream& out) {
    ProposalPipeline pipe(detector, rpm);
    for (const imaging::ManifestEntry& entry : manifest.entries) {
        const imaging::Frame frame = imaging::load_frame(manifest, entry);
        rpm::FrameProposals rec;
        rec.frame_id = entry.frame_id;
        rec.proposals = pipe.process(frame);
        rpm::write_proposal_line(out, rec);
    }
}

void propose_keyframes(const tracking::MapStore& store, const rpm::RpmConfig& rpm,
                       std::ostream& out) {
    for (const tracking::KeyFrame& kf : store.keyframes()) {
        rpm::FrameProposals rec;
        rec.frame_id = kf.frame_id;
        rec.proposals = rpm::generate_proposals(store, kf.timestamp_s, kf.width, kf.height, rpm);
        rpm::write_proposal_line(out, rec);
    }
}

} // namespace rpmkit::pipeline
