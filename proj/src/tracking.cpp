#include "tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "error.hpp"
#include "json.hpp"

using nlohmann::json;

namespace rpmkit::tracking {

double MapStore::process_frame(const imaging::Frame& frame,
                               const std::vector<features::KeyPoint>& keypoints) {
    if (!keyframes_.empty() && frame.timestamp_s <= keyframes_.back().timestamp_s)
        raise(Errc::state, "out-of-order timestamp for frame " + std::to_string(frame.frame_id));
    if (frame.timestamp_s <= last_frame_ts_)
        raise(Errc::state, "out-of-order timestamp for frame " + std::to_string(frame.frame_id));
    last_frame_ts_ = frame.timestamp_s;

    // retirement first: anything unseen for too long leaves the match pool
    std::erase_if(active_ids_, [&](int64_t id) {
        return frame.timestamp_s - tracks_.at(id).last().timestamp_s > params_.retire_after_s;
    });

    const size_t active_before = active_ids_.size();
    const double gate = params_.spatial_gate_px;
    const double gate_sq = gate * gate;

    // spatial hash over active track positions, cell size = gate
    std::unordered_map<int64_t, std::vector<size_t>> cells;
    auto cell_key = [gate](float x, float y) {
        const int64_t cx = static_cast<int64_t>(std::floor(x / gate));
        const int64_t cy = static_cast<int64_t>(std::floor(y / gate));
        return (cx << 32) ^ (cy & 0xffffffffLL);
    };
    for (size_t i = 0; i < active_ids_.size(); ++i) {
        const Observation& o = tracks_.at(active_ids_[i]).last();
        cells[cell_key(o.x, o.y)].push_back(i);
    }

    constexpr int kAbsGate = 64;
    constexpr double kRatio = 0.8;
    constexpr int kInf = std::numeric_limits<int>::max();

    struct Forward {
        int best = kInf;
        int second = kInf;
        int track_slot = -1;
    };
    std::vector<Forward> fwd(keypoints.size());
    std::vector<int> best_kp_for_track(active_ids_.size(), -1);
    std::vector<int> best_dist_for_track(active_ids_.size(), kInf);

    for (size_t ik = 0; ik < keypoints.size(); ++ik) {
        const features::KeyPoint& kp = keypoints[ik];
        const int64_t cx = static_cast<int64_t>(std::floor(kp.x / gate));
        const int64_t cy = static_cast<int64_t>(std::floor(kp.y / gate));
        for (int64_t dy = -1; dy <= 1; ++dy) {
            for (int64_t dx = -1; dx <= 1; ++dx) {
                const auto it = cells.find(((cx + dx) << 32) ^ ((cy + dy) & 0xffffffffLL));
                if (it == cells.end())
                    continue;
                for (size_t slot : it->second) {
                    const Track& track = tracks_.at(active_ids_[slot]);
                    const Observation& o = track.last();
                    const double ddx = kp.x - o.x;
                    const double ddy = kp.y - o.y;
                    if (ddx * ddx + ddy * ddy > gate_sq)
                        continue;
                    const int d = features::hamming_distance(kp.descriptor, track.last_descriptor);
                    Forward& f = fwd[ik];
                    if (d < f.best) {
                        f.second = f.best;
                        f.best = d;
                        f.track_slot = static_cast<int>(slot);
                    } else if (d == f.best) {
                        f.second = d; // ambiguous nearest; ratio test will reject
                        if (static_cast<int>(slot) < f.track_slot)
                            f.track_slot = static_cast<int>(slot);
                    } else if (d < f.second) {
                        f.second = d;
                    }
                    if (d < best_dist_for_track[slot]) {
                        best_dist_for_track[slot] = d;
                        best_kp_for_track[slot] = static_cast<int>(ik);
                    }
                }
            }
        }
    }

    size_t matched = 0;
    std::vector<int64_t> spawned;
    for (size_t ik = 0; ik < keypoints.size(); ++ik) {
        const Forward& f = fwd[ik];
        const features::KeyPoint& kp = keypoints[ik];
        const Observation obs{frame.frame_id, frame.timestamp_s, kp.x, kp.y};

        bool accept = f.track_slot >= 0 && f.best <= kAbsGate;
        if (accept && f.second != kInf)
            accept = static_cast<double>(f.best) < kRatio * static_cast<double>(f.second);
        if (accept)
            accept = best_kp_for_track[static_cast<size_t>(f.track_slot)] == static_cast<int>(ik);

        if (accept) {
            Track& track = tracks_.at(active_ids_[static_cast<size_t>(f.track_slot)]);
            track.observations.push_back(obs);
            track.last_descriptor = kp.descriptor;
            ++matched;
        } else {
            Track track;
            track.track_id = next_track_id_++;
            track.observations.push_back(obs);
            track.last_descriptor = kp.descriptor;
            spawned.push_back(track.track_id);
            tracks_.emplace(track.track_id, std::move(track));
        }
    }

    // spawned ids are all above the previous maximum, so order is preserved
    active_ids_.insert(active_ids_.end(), spawned.begin(), spawned.end());

    return static_cast<double>(matched) / static_cast<double>(std::max<size_t>(1, active_before));
}

bool MapStore::should_insert_keyframe(double tracked_ratio, int64_t frame_id) const {
    if (keyframes_.empty())
        return true;
    if (tracked_ratio < params_.keyframe_min_ratio)
        return true;
    return frame_id - keyframes_.back().frame_id >= params_.keyframe_max_gap;
}

void MapStore::insert_keyframe(const imaging::Frame& frame) {
    if (!keyframes_.empty() && frame.timestamp_s <= keyframes_.back().timestamp_s)
        raise(Errc::state, "keyframe timestamps must strictly increase");

    KeyFrame kf;
    kf.frame_id = frame.frame_id;
    kf.timestamp_s = frame.timestamp_s;
    kf.width = frame.width;
    kf.height = frame.height;
    for (int64_t id : active_ids_) {
        const Track& track = tracks_.at(id);
        const Observation& o = track.last();
        if (o.frame_id == frame.frame_id)
            kf.points.push_back(KeyFramePoint{id, o.x, o.y});
    }
    keyframes_.push_back(std::move(kf));
}

std::vector<WindowPoint> MapStore::window_points(double t_now, double window_s) const {
    const double t_min = t_now - window_s;
    std::map<int64_t, std::pair<double, WindowPoint>> latest; // track_id -> (kf time, point)
    for (const KeyFrame& kf : keyframes_) {
        if (kf.timestamp_s < t_min || kf.timestamp_s > t_now)
            continue;
        for (const KeyFramePoint& p : kf.points) {
            auto [it, inserted] =
                latest.try_emplace(p.track_id, kf.timestamp_s, WindowPoint{p.track_id, p.x, p.y});
            if (!inserted && kf.timestamp_s > it->second.first)
                it->second = {kf.timestamp_s, WindowPoint{p.track_id, p.x, p.y}};
        }
    }
    std::vector<WindowPoint> out;
    out.reserve(latest.size());
    for (const auto& [id, entry] : latest)
        out.push_back(entry.second);
    return out;
}

void MapStore::append_keyframe_raw(KeyFrame kf) {
    if (!keyframes_.empty() && kf.timestamp_s <= keyframes_.back().timestamp_s)
        raise(Errc::state, "keyframe timestamps must strictly increase");
    keyframes_.push_back(std::move(kf));
}

void MapStore::extend_track(int64_t track_id, Observation obs) {
    auto it = tracks_.find(track_id);
    if (it == tracks_.end()) {
        Track track;
        track.track_id = track_id;
        track.observations.push_back(obs);
        tracks_.emplace(track_id, std::move(track));
        next_track_id_ = std::max(next_track_id_, track_id + 1);
        return;
    }
    it->second.observations.push_back(obs);
}

MapStore ingest_external_keyframes(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io, "cannot open keyframe dump: " + path);

    struct RawKeyFrame {
        KeyFrame kf;
        std::vector<size_t> fresh_slots; // points with null ids
    };
    std::vector<RawKeyFrame> records;
    int64_t max_explicit_id = -1;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::string where = path + ": record at line " + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            raise(Errc::format, where + ": " + e.what());
        }

        RawKeyFrame raw;
        KeyFrame& kf = raw.kf;
        std::vector<int64_t> explicit_ids;
        try {
            kf.frame_id = rec.at("frame_id").get<int64_t>();
            kf.timestamp_s = rec.at("timestamp_s").get<double>();
            kf.width = rec.at("width").get<int>();
            kf.height = rec.at("height").get<int>();
            for (const json& jp : rec.at("points")) {
                KeyFramePoint p;
                p.x = jp.at("x").get<float>();
                p.y = jp.at("y").get<float>();
                const json& jid = jp.at("id");
                if (jid.is_null()) {
                    raw.fresh_slots.push_back(kf.points.size());
                    p.track_id = -1;
                } else {
                    p.track_id = jid.get<int64_t>();
                    if (p.track_id < 0)
                        raise(Errc::format, where + ": negative track id");
                    explicit_ids.push_back(p.track_id);
                    max_explicit_id = std::max(max_explicit_id, p.track_id);
                }
                kf.points.push_back(p);
            }
        } catch (const json::exception& e) {
            raise(Errc::format, where + ": " + e.what());
        }

        if (kf.width <= 0 || kf.height <= 0)
            raise(Errc::format, where + ": non-positive frame dimensions");
        for (const KeyFramePoint& p : kf.points) {
            if (p.x < 0.0f || p.y < 0.0f || p.x >= static_cast<float>(kf.width) ||
                p.y >= static_cast<float>(kf.height))
                raise(Errc::format, where + " (frame " + std::to_string(kf.frame_id) +
                                        "): point outside frame bounds");
        }
        std::sort(explicit_ids.begin(), explicit_ids.end());
        if (std::adjacent_find(explicit_ids.begin(), explicit_ids.end()) != explicit_ids.end())
            raise(Errc::format, where + ": duplicate track id within keyframe");
        if (!records.empty() && kf.timestamp_s <= records.back().kf.timestamp_s)
            raise(Errc::format, where + ": non-monotonic timestamp");
        records.push_back(std::move(raw));
    }

    // Second pass: fresh ids start above every explicit id in the file.
    MapStore store;
    int64_t next_fresh = max_explicit_id + 1;
    for (RawKeyFrame& raw : records) {
        KeyFrame& kf = raw.kf;
        for (size_t slot : raw.fresh_slots)
            kf.points[slot].track_id = next_fresh++;
        for (const KeyFramePoint& p : kf.points)
            store.extend_track(p.track_id,
                               Observation{kf.frame_id, kf.timestamp_s, p.x, p.y});
        std::sort(kf.points.begin(), kf.points.end(),
                  [](const KeyFramePoint& a, const KeyFramePoint& b) {
                      return a.track_id < b.track_id;
                  });
        store.append_keyframe_raw(std::move(kf));
    }
    return store;
}

} // namespace rpmkit::tracking
