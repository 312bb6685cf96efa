#pragma once

#include <vector>

#include "features.hpp"
#include "imaging.hpp"
#include "rpm.hpp"
#include "tracking.hpp"

namespace rpmkit::pipeline {

struct StageTimes {
    double detect_ms = 0.0;  // pyramid + keypoints + descriptors
    double track_ms = 0.0;   // matching, track upkeep, keyframe insertion
    double cluster_ms = 0.0; // windowing + kmeans + box construction
    double nms_ms = 0.0;
    double total_ms = 0.0;   // measured end to end, not a stage sum
};

// Stateful detect -> track -> cluster -> suppress chain; frames must arrive
// in timestamp order.
class ProposalPipeline {
public:
    ProposalPipeline(const features::DetectorConfig& detector, const rpm::RpmConfig& rpm,
                     const tracking::TrackerParams& tracker = {})
        : detector_(detector), rpm_(rpm), store_(tracker) {}

    std::vector<rpm::Proposal> process(const imaging::Frame& frame, StageTimes* times = nullptr);

    const tracking::MapStore& store() const { return store_; }
    const features::DetectorConfig& detector_config() const { return detector_; }
    const rpm::RpmConfig& rpm_config() const { return rpm_; }

private:
    features::DetectorConfig detector_;
    rpm::RpmConfig rpm_;
    tracking::MapStore store_;
};

// Runs the pipeline over every manifest frame and streams one proposal
// record per frame.
void propose_manifest(const imaging::FrameManifest& manifest,
                      const features::DetectorConfig& detector, const rpm::RpmConfig& rpm,
                      std::ostream& out);

// Replays an ingested keyframe store: one proposal record per keyframe,
// windowed at that keyframe's timestamp against its frame dimensions.
void propose_keyframes(const tracking::MapStore& store, const rpm::RpmConfig& rpm,
                       std::ostream& out);

} // namespace rpmkit::pipeline
