#include <doctest.h>

#include <string>
#include <vector>

#include "error.hpp"
#include "helpers.hpp"
#include "rng.hpp"
#include "tracking.hpp"

using namespace rpmkit;
using imaging::Frame;
using tracking::KeyFrame;
using tracking::KeyFramePoint;
using tracking::MapStore;
using tracking::WindowPoint;

namespace {

Frame tagged_frame(int64_t id, double ts) {
    Frame f = testutil::constant_frame(64, 48, 0);
    f.frame_id = id;
    f.timestamp_s = ts;
    return f;
}

// Keypoints on a grid with independent random descriptors: cross distances
// sit near 128, far beyond the matcher's absolute gate.
std::vector<features::KeyPoint> synthetic_keypoints(int count, uint64_t seed,
                                                    float dx = 0.0f, float dy = 0.0f) {
    SplitMix64 rng(seed);
    std::vector<features::KeyPoint> kps;
    kps.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        features::KeyPoint kp;
        kp.x = 30.0f * (i % 10) + 5.0f + dx;
        kp.y = 30.0f * (i / 10) + 5.0f + dy;
        kp.response = 10.0f;
        for (auto& word : kp.descriptor)
            word = rng.next();
        kps.push_back(kp);
    }
    return kps;
}

KeyFrame raw_keyframe(int64_t frame_id, double ts,
                      std::vector<KeyFramePoint> points) {
    KeyFrame kf;
    kf.frame_id = frame_id;
    kf.timestamp_s = ts;
    kf.width = 640;
    kf.height = 480;
    kf.points = std::move(points);
    return kf;
}

} // namespace

TEST_CASE("cold start spawns a track per keypoint with zero tracked ratio") {
    MapStore store;
    const double ratio = store.process_frame(tagged_frame(0, 0.0), synthetic_keypoints(100, 1));
    CHECK(ratio == 0.0);
    CHECK(store.tracks().size() == 100);
    CHECK(store.active_track_count() == 100);
}

TEST_CASE("re-observing the same keypoints extends every track") {
    MapStore store;
    store.process_frame(tagged_frame(0, 0.0), synthetic_keypoints(100, 1));

    SUBCASE("identical positions") {
        const double ratio = store.process_frame(tagged_frame(1, 0.04), synthetic_keypoints(100, 1));
        CHECK(ratio == 1.0);
        CHECK(store.tracks().size() == 100);
    }
    SUBCASE("small motion within the spatial gate") {
        const double ratio =
            store.process_frame(tagged_frame(1, 0.04), synthetic_keypoints(100, 1, 10.0f, -8.0f));
        CHECK(ratio == 1.0);
        CHECK(store.tracks().size() == 100);
        for (const auto& [id, track] : store.tracks())
            CHECK(track.observations.size() == 2);
    }
    SUBCASE("motion beyond the gate severs the association") {
        const double ratio =
            store.process_frame(tagged_frame(1, 0.04), synthetic_keypoints(100, 1, 300.0f, 0.0f));
        CHECK(ratio == 0.0);
        CHECK(store.tracks().size() == 200);
    }
}

TEST_CASE("tracks unseen past the retirement horizon leave the active set") {
    MapStore store; // retire_after_s = 2.0
    store.process_frame(tagged_frame(0, 0.0), synthetic_keypoints(50, 2));
    CHECK(store.active_track_count() == 50);

    const double ratio = store.process_frame(tagged_frame(80, 3.1), {});
    CHECK(ratio == 0.0);
    CHECK(store.active_track_count() == 0);
    CHECK(store.tracks().size() == 50); // history preserved for keyframes

    // re-observation after retirement spawns new identities
    store.process_frame(tagged_frame(81, 3.2), synthetic_keypoints(50, 2));
    CHECK(store.tracks().size() == 100);
}

TEST_CASE("frames must arrive in strictly increasing time order") {
    MapStore store;
    store.process_frame(tagged_frame(0, 1.0), synthetic_keypoints(5, 3));
    CHECK_THROWS_WITH_AS(store.process_frame(tagged_frame(1, 0.9), {}),
                         doctest::Contains("out-of-order timestamp for frame 1"), Error);
    try {
        store.process_frame(tagged_frame(2, 1.0), {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::state);
    }
}

TEST_CASE("keyframe policy: first frame, low ratio, or a long gap") {
    MapStore store; // min ratio 0.7, max gap 15
    CHECK(store.should_insert_keyframe(1.0, 0)); // nothing stored yet

    store.process_frame(tagged_frame(10, 1.0), synthetic_keypoints(10, 4));
    store.insert_keyframe(tagged_frame(10, 1.0));

    CHECK_FALSE(store.should_insert_keyframe(0.9, 13)); // healthy and recent
    CHECK(store.should_insert_keyframe(0.69, 11));      // tracking degraded
    CHECK(store.should_insert_keyframe(0.9, 25));       // gap of exactly 15
    CHECK_FALSE(store.should_insert_keyframe(0.7, 24)); // gap 14, ratio at the limit
}

TEST_CASE("keyframes snapshot exactly the tracks observed in that frame") {
    MapStore store;
    store.process_frame(tagged_frame(3, 0.5), synthetic_keypoints(4, 5));
    store.insert_keyframe(tagged_frame(3, 0.5));

    REQUIRE(store.keyframes().size() == 1);
    const KeyFrame& kf = store.keyframes()[0];
    CHECK(kf.frame_id == 3);
    CHECK(kf.timestamp_s == 0.5);
    CHECK(kf.width == 64);
    CHECK(kf.height == 48);
    REQUIRE(kf.points.size() == 4);
    for (size_t i = 1; i < kf.points.size(); ++i)
        CHECK(kf.points[i - 1].track_id < kf.points[i].track_id);

    // next frame only re-observes nothing: keyframe there has no points
    store.process_frame(tagged_frame(4, 0.54), {});
    store.insert_keyframe(tagged_frame(4, 0.54));
    CHECK(store.keyframes()[1].points.empty());
}

TEST_CASE("window queries keep the latest position of each recent track") {
    MapStore store;
    store.append_keyframe_raw(raw_keyframe(0, 1.0, {{0, 10.0f, 10.0f}}));
    store.append_keyframe_raw(raw_keyframe(1, 3.0, {{0, 12.0f, 10.0f}, {1, 50.0f, 50.0f}}));
    store.append_keyframe_raw(raw_keyframe(2, 7.0, {{1, 55.0f, 50.0f}, {2, 100.0f, 100.0f}}));
    store.append_keyframe_raw(raw_keyframe(3, 9.5, {{2, 102.0f, 98.0f}, {3, 200.0f, 150.0f}}));

    SUBCASE("five-second window at t=10 sees only the last two keyframes") {
        const auto pts = store.window_points(10.0, 5.0);
        REQUIRE(pts.size() == 3);
        CHECK(pts[0].track_id == 1);
        CHECK(pts[0].x == 55.0f);
        CHECK(pts[1].track_id == 2);
        CHECK(pts[1].x == 102.0f); // newest observation wins
        CHECK(pts[1].y == 98.0f);
        CHECK(pts[2].track_id == 3);
    }
    SUBCASE("window bounds are inclusive on both ends") {
        const auto lower = store.window_points(12.0, 5.0); // t_min lands on 7.0
        REQUIRE(lower.size() == 3);
        CHECK(lower[0].track_id == 1);

        const auto point_window = store.window_points(9.5, 0.0);
        REQUIRE(point_window.size() == 2);
        CHECK(point_window[0].track_id == 2);
        CHECK(point_window[1].track_id == 3);
    }
    SUBCASE("a window covering no keyframe is empty") {
        CHECK(store.window_points(6.5, 1.0).empty());
        CHECK(store.window_points(0.5, 5.0).empty());
    }
    SUBCASE("widening the window never removes points") {
        for (double t_now : {4.0, 8.0, 10.0, 12.0}) {
            size_t prev = 0;
            for (double w : {0.5, 2.0, 5.0, 20.0}) {
                const size_t n = store.window_points(t_now, w).size();
                CHECK(n >= prev);
                prev = n;
            }
        }
    }
}

TEST_CASE("raw keyframe appends enforce increasing timestamps") {
    MapStore store;
    store.append_keyframe_raw(raw_keyframe(0, 1.0, {}));
    CHECK_THROWS_WITH_AS(store.append_keyframe_raw(raw_keyframe(1, 1.0, {})),
                         doctest::Contains("strictly increase"), Error);
    CHECK_THROWS_AS(store.append_keyframe_raw(raw_keyframe(1, 0.5, {})), Error);
}

TEST_CASE("external keyframe dumps rebuild shared tracks") {
    const auto dir = testutil::make_temp_dir("ingest");
    const auto path = dir / "kf.jsonl";
    testutil::spit(path,
                   "{\"frame_id\": 0, \"timestamp_s\": 0.0, \"width\": 640, \"height\": 480, "
                   "\"points\": [{\"id\": 5, \"x\": 10.0, \"y\": 20.0}, "
                   "{\"id\": 9, \"x\": 30.0, \"y\": 40.0}, "
                   "{\"id\": null, \"x\": 50.0, \"y\": 60.0}]}\n"
                   "{\"frame_id\": 10, \"timestamp_s\": 0.5, \"width\": 640, \"height\": 480, "
                   "\"points\": [{\"id\": 5, \"x\": 12.0, \"y\": 22.0}, "
                   "{\"id\": null, \"x\": 70.0, \"y\": 80.0}]}\n");

    MapStore store = tracking::ingest_external_keyframes(path.string());
    REQUIRE(store.keyframes().size() == 2);
    CHECK(store.tracks().size() == 4);
    CHECK(store.tracks().at(5).observations.size() == 2); // shared across keyframes

    // fresh ids (nulls) sit above the largest explicit id in the file
    const KeyFrame& kf0 = store.keyframes()[0];
    REQUIRE(kf0.points.size() == 3);
    CHECK(kf0.points[0].track_id == 5);
    CHECK(kf0.points[1].track_id == 9);
    CHECK(kf0.points[2].track_id == 10);
    const KeyFrame& kf1 = store.keyframes()[1];
    REQUIRE(kf1.points.size() == 2);
    CHECK(kf1.points[1].track_id == 11);

    const auto pts = store.window_points(0.5, 5.0);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].track_id == 5);
    CHECK(pts[0].x == 12.0f); // newest observation of track 5

    // ingesting the same dump twice is bit-for-bit repeatable
    MapStore again = tracking::ingest_external_keyframes(path.string());
    REQUIRE(again.keyframes().size() == store.keyframes().size());
    for (size_t i = 0; i < store.keyframes().size(); ++i) {
        const KeyFrame& a = store.keyframes()[i];
        const KeyFrame& b = again.keyframes()[i];
        CHECK(a.frame_id == b.frame_id);
        CHECK(a.timestamp_s == b.timestamp_s);
        REQUIRE(a.points.size() == b.points.size());
        for (size_t j = 0; j < a.points.size(); ++j) {
            CHECK(a.points[j].track_id == b.points[j].track_id);
            CHECK(a.points[j].x == b.points[j].x);
            CHECK(a.points[j].y == b.points[j].y);
        }
    }
}

TEST_CASE("fresh ids never collide with explicit ids later in the file") {
    const auto dir = testutil::make_temp_dir("ingest");
    const auto path = dir / "kf.jsonl";
    testutil::spit(path,
                   "{\"frame_id\": 0, \"timestamp_s\": 0.0, \"width\": 640, \"height\": 480, "
                   "\"points\": [{\"id\": null, \"x\": 1.0, \"y\": 1.0}]}\n"
                   "{\"frame_id\": 1, \"timestamp_s\": 0.1, \"width\": 640, \"height\": 480, "
                   "\"points\": [{\"id\": 100, \"x\": 2.0, \"y\": 2.0}]}\n");
    MapStore store = tracking::ingest_external_keyframes(path.string());
    CHECK(store.keyframes()[0].points[0].track_id == 101);
    CHECK(store.tracks().size() == 2);
}

TEST_CASE("keyframe dump validation names the offending record") {
    const auto dir = testutil::make_temp_dir("ingest");
    const auto path = dir / "kf.jsonl";
    const std::string good =
        "{\"frame_id\": 0, \"timestamp_s\": 0.0, \"width\": 640, \"height\": 480, "
        "\"points\": [{\"id\": 1, \"x\": 1.0, \"y\": 1.0}]}\n";

    SUBCASE("missing file") {
        try {
            tracking::ingest_external_keyframes((dir / "absent.jsonl").string());
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::io);
        }
    }
    SUBCASE("malformed json") {
        testutil::spit(path, good + "{broken\n");
        CHECK_THROWS_WITH_AS(tracking::ingest_external_keyframes(path.string()),
                             doctest::Contains("record at line 2"), Error);
    }
    SUBCASE("point outside the frame names the frame") {
        testutil::spit(path, "{\"frame_id\": 7, \"timestamp_s\": 0.0, \"width\": 640, "
                             "\"height\": 480, \"points\": [{\"id\": 1, \"x\": 640.0, "
                             "\"y\": 0.0}]}\n");
        CHECK_THROWS_WITH_AS(tracking::ingest_external_keyframes(path.string()),
                             doctest::Contains("(frame 7): point outside frame bounds"), Error);
    }
    SUBCASE("non-monotonic timestamps") {
        testutil::spit(path, good + "{\"frame_id\": 1, \"timestamp_s\": 0.0, \"width\": 640, "
                                    "\"height\": 480, \"points\": []}\n");
        CHECK_THROWS_WITH_AS(tracking::ingest_external_keyframes(path.string()),
                             doctest::Contains("non-monotonic timestamp"), Error);
    }
    SUBCASE("duplicate explicit id within one keyframe") {
        testutil::spit(path, "{\"frame_id\": 0, \"timestamp_s\": 0.0, \"width\": 640, "
                             "\"height\": 480, \"points\": [{\"id\": 3, \"x\": 1.0, \"y\": 1.0}, "
                             "{\"id\": 3, \"x\": 2.0, \"y\": 2.0}]}\n");
        CHECK_THROWS_WITH_AS(tracking::ingest_external_keyframes(path.string()),
                             doctest::Contains("duplicate track id"), Error);
    }
    SUBCASE("negative track id") {
        testutil::spit(path, "{\"frame_id\": 0, \"timestamp_s\": 0.0, \"width\": 640, "
                             "\"height\": 480, \"points\": [{\"id\": -4, \"x\": 1.0, "
                             "\"y\": 1.0}]}\n");
        CHECK_THROWS_WITH_AS(tracking::ingest_external_keyframes(path.string()),
                             doctest::Contains("negative track id"), Error);
    }
}
