#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "features.hpp"
#include "imaging.hpp"

namespace rpmkit::tracking {

struct Observation {
    int64_t frame_id = 0;
    double timestamp_s = 0.0;
    float x = 0.0f;
    float y = 0.0f;
};

// A keypoint identity persisted across frames. Observations are ordered by
// timestamp; retired tracks keep their history because keyframes reference
// them by id.
struct Track {
    int64_t track_id = 0;
    std::vector<Observation> observations;
    features::Descriptor last_descriptor{};

    const Observation& last() const { return observations.back(); }
};

struct KeyFramePoint {
    int64_t track_id = 0;
    float x = 0.0f;
    float y = 0.0f;
};

// Snapshot of the tracked points at a selected frame.
struct KeyFrame {
    int64_t frame_id = 0;
    double timestamp_s = 0.0;
    int width = 0;
    int height = 0;
    std::vector<KeyFramePoint> points; // ordered by track_id
};

struct WindowPoint {
    int64_t track_id = 0;
    float x = 0.0f;
    float y = 0.0f;
};

struct TrackerParams {
    double spatial_gate_px = 60.0;  // max displacement matched frame-to-frame
    double retire_after_s = 2.0;    // tracks unseen longer than this are dropped
    double keyframe_min_ratio = 0.7;
    int64_t keyframe_max_gap = 15;  // frames since the last keyframe
};

// 2D stand-in for the SLAM map: keyframes ordered by timestamp plus the
// live track set. Single writer; window queries are read-only.
class MapStore {
public:
    explicit MapStore(TrackerParams params = {}) : params_(params) {}

    // Matches keypoints against active tracks (descriptor matching under the
    // spatial gate), extends or spawns tracks, retires stale ones. Returns
    // matched / max(1, active tracks before update).
    double process_frame(const imaging::Frame& frame,
                         const std::vector<features::KeyPoint>& keypoints);

    bool should_insert_keyframe(double tracked_ratio, int64_t frame_id) const;

    // Snapshots every track observed at exactly this frame.
    void insert_keyframe(const imaging::Frame& frame);

    // Union of keyframe points with timestamps in [t_now - window_s, t_now],
    // most recent observation per track, ordered by track_id.
    std::vector<WindowPoint> window_points(double t_now, double window_s) const;

    const std::vector<KeyFrame>& keyframes() const { return keyframes_; }
    const std::unordered_map<int64_t, Track>& tracks() const { return tracks_; }
    size_t active_track_count() const { return active_ids_.size(); }
    const TrackerParams& params() const { return params_; }

    // Used by the external-dump adapter.
    void append_keyframe_raw(KeyFrame kf);
    void extend_track(int64_t track_id, Observation obs);

private:
    TrackerParams params_;
    std::vector<KeyFrame> keyframes_;
    std::unordered_map<int64_t, Track> tracks_;
    std::vector<int64_t> active_ids_; // ascending; spawn order is id order
    int64_t next_track_id_ = 0;
    double last_frame_ts_ = -1.0;
};

// Reads a line-delimited keyframe dump:
// {"frame_id":, "timestamp_s":, "width":, "height":,
//  "points": [{"id": <int|null>, "x":, "y":}]}
// Explicit point ids become shared tracks; null ids get fresh ones.
MapStore ingest_external_keyframes(const std::string& path);

} // namespace rpmkit::tracking
