// Exercises the shared library through the public C header only; no core
// headers, so this doubles as a check that the exported surface is complete.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rpmkit.h"

namespace {

std::filesystem::path make_temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("rpmkit_capi_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

size_t count_lines(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        n += c == '\n';
    return n;
}

// 96x96 bright frame with two dark squares; their corners are stable FAST
// targets and their constant interiors match perfectly across frames.
std::vector<uint8_t> two_square_frame() {
    std::vector<uint8_t> px(96 * 96, 200);
    auto fill = [&](int x0, int y0) {
        for (int y = y0; y < y0 + 20; ++y)
            for (int x = x0; x < x0 + 20; ++x)
                px[static_cast<size_t>(y) * 96 + x] = 30;
    };
    fill(25, 25);
    fill(55, 55);
    return px;
}

std::string kf_line(int64_t frame_id, double ts, double dx) {
    const double off[6][2] = {{-2, 0}, {-1, -2}, {0, 2}, {1, -1}, {2, 1}, {0, 0}};
    std::ostringstream os;
    os << "{\"frame_id\": " << frame_id << ", \"timestamp_s\": " << ts
       << ", \"width\": 640, \"height\": 480, \"points\": [";
    bool first = true;
    for (int blob = 0; blob < 2; ++blob) {
        const double bx = blob ? 500.0 : 100.0;
        const double by = blob ? 380.0 : 100.0;
        for (int i = 0; i < 6; ++i) {
            if (!first)
                os << ", ";
            first = false;
            os << "{\"id\": " << (blob * 6 + i + 1) << ", \"x\": " << (bx + off[i][0] + dx)
               << ", \"y\": " << (by + off[i][1]) << "}";
        }
    }
    os << "]}\n";
    return os.str();
}

} // namespace

TEST_CASE("last_error starts empty and status names are stable") {
    REQUIRE(rpmkit_last_error() != nullptr);
    CHECK(std::string(rpmkit_last_error()).empty());

    CHECK(std::string(rpmkit_status_name(RPMKIT_OK)) == "ok");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_INVALID_ARGUMENT)) == "invalid_argument");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_IO)) == "io");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_FORMAT)) == "format");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_STATE)) == "state");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_UNSATISFIABLE)) == "unsatisfiable");
    CHECK(std::string(rpmkit_status_name(RPMKIT_ERR_INTERNAL)) == "internal");
    CHECK(std::string(rpmkit_status_name(static_cast<rpmkit_status>(99))) == "unknown");
}

TEST_CASE("config init fills the documented defaults") {
    rpmkit_detector_config det;
    rpmkit_detector_config_init(&det);
    CHECK(det.max_keypoints == 2000);
    CHECK(det.fast_threshold == 20);
    CHECK(det.scale_factor == doctest::Approx(1.2));
    CHECK(det.n_levels == 8);
    CHECK(det.grid_cells == 16);

    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);
    REQUIRE(rpm.k_count == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(rpm.k_values[i] == i + 2);
    CHECK(rpm.window_seconds == doctest::Approx(5.0));
    CHECK(rpm.anchors_enabled == 1);
    REQUIRE(rpm.anchor_scale_count == 3);
    CHECK(rpm.anchor_scale_fracs[0] == doctest::Approx(0.1));
    CHECK(rpm.anchor_scale_fracs[2] == doctest::Approx(0.4));
    REQUIRE(rpm.anchor_ratio_count == 3);
    CHECK(rpm.anchor_ratios[0] == doctest::Approx(0.5));
    CHECK(rpm.anchor_ratios[2] == doctest::Approx(2.0));
    CHECK(rpm.nms_iou == doctest::Approx(0.8));
    CHECK(rpm.min_cluster_points == 3);
    CHECK(rpm.bbox_pad_frac == doctest::Approx(0.05));
    CHECK(rpm.kmeans_max_iters == 50);
    CHECK(rpm.kmeans_restarts == 5);
    CHECK(rpm.rng_seed == 0);

    rpmkit_synth_config synth;
    rpmkit_synth_config_init(&synth);
    CHECK(synth.width == 640);
    CHECK(synth.height == 480);
    CHECK(synth.n_frames == 300);
    CHECK(synth.n_tools == 2);
    CHECK(synth.tool_size_min == 64);
    CHECK(synth.tool_size_max == 128);
    CHECK(synth.speed_min == doctest::Approx(0.3));
    CHECK(synth.speed_max == doctest::Approx(1.2));
    CHECK(synth.texture_noise_sigma == doctest::Approx(60.0));
    CHECK(synth.background_sigma == doctest::Approx(4.0));
    CHECK(synth.fps == doctest::Approx(25.0));
    CHECK(synth.rng_seed == 0);
}

TEST_CASE("null arguments are rejected with a message") {
    CHECK(rpmkit_session_create(nullptr, nullptr, nullptr) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(!std::string(rpmkit_last_error()).empty());
    CHECK(rpmkit_synth_generate(nullptr, "x") == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_propose_manifest(nullptr, nullptr, nullptr, nullptr) ==
          RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_propose_keyframes(nullptr, nullptr, nullptr) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_evaluate(nullptr, nullptr, nullptr, 0, nullptr) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_benchmark(nullptr, nullptr, nullptr, 0, nullptr) ==
          RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_render_overlays(nullptr, nullptr, nullptr, nullptr, nullptr) ==
          RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_recall_report_write_table(nullptr, "-") == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_timing_report_write_table(nullptr, "-") == RPMKIT_ERR_INVALID_ARGUMENT);

    // accessors on null reports degrade to zeros instead of crashing
    CHECK(rpmkit_recall_report_threshold_count(nullptr) == 0);
    CHECK(rpmkit_recall_report_abo(nullptr) == 0.0);

    // destroy tolerates null
    rpmkit_session_destroy(nullptr);
    rpmkit_recall_report_destroy(nullptr);
}

TEST_CASE("invalid configs fail session creation with the core message") {
    rpmkit_detector_config det;
    rpmkit_detector_config_init(&det);
    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);
    rpmkit_session* session = nullptr;

    det.n_levels = 0;
    CHECK(rpmkit_session_create(&det, &rpm, &session) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rpmkit_last_error()) == "n_levels must be positive");
    CHECK(session == nullptr);

    rpmkit_detector_config_init(&det);
    rpm.k_count = 0;
    CHECK(rpmkit_session_create(&det, &rpm, &session) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rpmkit_last_error()) == "k_count out of range");

    rpmkit_rpm_config_init(&rpm);
    rpm.nms_iou = 0.0;
    CHECK(rpmkit_session_create(&det, &rpm, &session) == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rpmkit_last_error()) == "nms_iou must lie in (0, 1]");
}

TEST_CASE("session streaming: deterministic proposals, state errors, recovery") {
    rpmkit_detector_config det;
    rpmkit_detector_config_init(&det);
    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);

    const std::vector<uint8_t> px = two_square_frame();

    auto run_session = [&](std::vector<rpmkit_proposal>& collected) {
        rpmkit_session* session = nullptr;
        REQUIRE(rpmkit_session_create(&det, &rpm, &session) == RPMKIT_OK);
        REQUIRE(session != nullptr);
        const rpmkit_proposal* props = nullptr;
        size_t count = 0;
        for (int i = 0; i < 3; ++i) {
            REQUIRE(rpmkit_session_process_frame(session, i, 0.04 * i, px.data(), 96, 96, &props,
                                                 &count) == RPMKIT_OK);
        }
        collected.assign(props, props + count);
        rpmkit_session_destroy(session);
    };

    std::vector<rpmkit_proposal> a, b;
    run_session(a);
    run_session(b);

    REQUIRE(!a.empty());
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].frame_id == 2);
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].w == b[i].w);
        CHECK(a[i].h == b[i].h);
        CHECK(a[i].score == b[i].score);
        CHECK(a[i].source == b[i].source);
        CHECK(a[i].k == b[i].k);

        CHECK(a[i].x >= 0.0);
        CHECK(a[i].y >= 0.0);
        CHECK(a[i].w > 0.0);
        CHECK(a[i].h > 0.0);
        CHECK(a[i].x + a[i].w <= 96.0 + 1e-6);
        CHECK(a[i].y + a[i].h <= 96.0 + 1e-6);
        CHECK(a[i].score > 0.0);
        CHECK(a[i].score <= 1.0);
        CHECK((a[i].source == RPMKIT_SOURCE_CLUSTER_EXTENT || a[i].source == RPMKIT_SOURCE_ANCHOR));
        CHECK(a[i].k >= 2);
    }

    rpmkit_session* session = nullptr;
    REQUIRE(rpmkit_session_create(&det, &rpm, &session) == RPMKIT_OK);
    const rpmkit_proposal* props = nullptr;
    size_t count = 0;

    CHECK(rpmkit_session_process_frame(session, 0, 0.0, nullptr, 96, 96, &props, &count) ==
          RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(rpmkit_session_process_frame(session, 0, 0.0, px.data(), 16, 96, &props, &count) ==
          RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rpmkit_last_error()) == "frame below minimum size");

    REQUIRE(rpmkit_session_process_frame(session, 0, 0.08, px.data(), 96, 96, &props, &count) ==
            RPMKIT_OK);
    CHECK(rpmkit_session_process_frame(session, 1, 0.04, px.data(), 96, 96, &props, &count) ==
          RPMKIT_ERR_STATE);
    CHECK(std::string(rpmkit_last_error()).find("out-of-order timestamp") != std::string::npos);

    // the rejected frame leaves the session usable
    CHECK(rpmkit_session_process_frame(session, 1, 0.12, px.data(), 96, 96, &props, &count) ==
          RPMKIT_OK);
    rpmkit_session_destroy(session);
}

TEST_CASE("one-shot drivers cover synth -> propose -> evaluate -> benchmark -> render") {
    const auto dir = make_temp_dir("flow");
    const std::string seq_dir = (dir / "seq").string();

    rpmkit_synth_config synth;
    rpmkit_synth_config_init(&synth);
    synth.width = 160;
    synth.height = 120;
    synth.n_frames = 25;
    synth.tool_size_min = 24;
    synth.tool_size_max = 40;
    synth.rng_seed = 11;
    REQUIRE(rpmkit_synth_generate(&synth, seq_dir.c_str()) == RPMKIT_OK);

    const std::string manifest = seq_dir + "/manifest.jsonl";
    const std::string annotations = seq_dir + "/annotations.json";
    REQUIRE(std::filesystem::exists(manifest));
    REQUIRE(std::filesystem::exists(annotations));
    REQUIRE(std::filesystem::exists(seq_dir + "/frame_000000.pgm"));

    rpmkit_detector_config det;
    rpmkit_detector_config_init(&det);
    det.max_keypoints = 300;
    det.n_levels = 4;
    det.grid_cells = 8;
    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);

    const std::string props = (dir / "proposals.jsonl").string();
    const std::string props2 = (dir / "proposals2.jsonl").string();
    REQUIRE(rpmkit_propose_manifest(manifest.c_str(), &det, &rpm, props.c_str()) == RPMKIT_OK);
    REQUIRE(rpmkit_propose_manifest(manifest.c_str(), &det, &rpm, props2.c_str()) == RPMKIT_OK);
    const std::string props_text = slurp(props);
    CHECK(count_lines(props_text) == 25);
    CHECK(props_text == slurp(props2)); // byte-identical reruns

    const double thresholds[2] = {0.5, 0.7};
    rpmkit_recall_report* report = nullptr;
    REQUIRE(rpmkit_evaluate(props.c_str(), annotations.c_str(), thresholds, 2, &report) ==
            RPMKIT_OK);
    REQUIRE(report != nullptr);
    CHECK(rpmkit_recall_report_threshold_count(report) == 2);
    CHECK(rpmkit_recall_report_threshold(report, 0) == 0.5);
    CHECK(rpmkit_recall_report_threshold(report, 1) == 0.7);
    CHECK(rpmkit_recall_report_ground_truth_count(report) == 50); // 2 tools x 25 frames
    CHECK(rpmkit_recall_report_proposal_count(report) >= 0);
    for (size_t i = 0; i < 2; ++i) {
        const double r = rpmkit_recall_report_recall(report, i);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
    const double abo = rpmkit_recall_report_abo(report);
    CHECK(abo >= 0.0);
    CHECK(abo <= 1.0);

    const std::string table = (dir / "recall.txt").string();
    REQUIRE(rpmkit_recall_report_write_table(report, table.c_str()) == RPMKIT_OK);
    const std::string table_text = slurp(table);
    CHECK(table_text.find("ground-truth boxes: 50") != std::string::npos);
    CHECK(table_text.find("  IoU threshold   recall\n") != std::string::npos);

    const std::string records = (dir / "recall.jsonl").string();
    REQUIRE(rpmkit_recall_report_write_records(report, records.c_str()) == RPMKIT_OK);
    CHECK(slurp(records).find("{\"kind\": \"overall\"") != std::string::npos);
    rpmkit_recall_report_destroy(report);

    rpmkit_timing_report timing;
    REQUIRE(rpmkit_benchmark(manifest.c_str(), &det, &rpm, 5, &timing) == RPMKIT_OK);
    CHECK(timing.frames == 20);
    CHECK(timing.width == 160);
    CHECK(timing.height == 120);
    CHECK(timing.fps > 0.0);
    CHECK(timing.total.mean_ms > 0.0);

    const std::string ttable = (dir / "timing.txt").string();
    REQUIRE(rpmkit_timing_report_write_table(&timing, ttable.c_str()) == RPMKIT_OK);
    const std::string ttable_text = slurp(ttable);
    CHECK(ttable_text.rfind("benchmark: 20 measured frames at 160x120, single-threaded\n", 0) ==
          0);
    CHECK(ttable_text.find("  paper target: 20 ms / 50 FPS\n") != std::string::npos);

    const std::string trecords = (dir / "timing.jsonl").string();
    REQUIRE(rpmkit_timing_report_write_records(&timing, trecords.c_str(), 0) == RPMKIT_OK);
    const std::string expected_records =
        "{\"kind\": \"bench_meta\", \"frames\": 20, \"width\": 160, \"height\": 120, "
        "\"single_threaded\": true, \"reference_total_ms\": 20.0, \"reference_fps\": 50.0}\n"
        "{\"kind\": \"stage\", \"name\": \"detect\"}\n"
        "{\"kind\": \"stage\", \"name\": \"track\"}\n"
        "{\"kind\": \"stage\", \"name\": \"cluster\"}\n"
        "{\"kind\": \"stage\", \"name\": \"nms\"}\n"
        "{\"kind\": \"stage\", \"name\": \"total\"}\n"
        "{\"kind\": \"fps\"}\n";
    CHECK(slurp(trecords) == expected_records);

    const std::string trecords_full = (dir / "timing_full.jsonl").string();
    REQUIRE(rpmkit_timing_report_write_records(&timing, trecords_full.c_str(), 1) == RPMKIT_OK);
    CHECK(slurp(trecords_full).find("\"mean_ms\": ") != std::string::npos);

    const std::string overlays = (dir / "overlays").string();
    REQUIRE(rpmkit_render_overlays(manifest.c_str(), props.c_str(), annotations.c_str(),
                                   overlays.c_str(), "pgm") == RPMKIT_OK);
    CHECK(std::filesystem::exists(overlays + "/overlay_000000.pgm"));
    size_t n_overlays = 0;
    for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(overlays))
        ++n_overlays;
    CHECK(n_overlays == 25);

    // ground truth is optional; bad formats are rejected up front
    REQUIRE(rpmkit_render_overlays(manifest.c_str(), props.c_str(), nullptr,
                                   (dir / "overlays2").string().c_str(), "pgm") == RPMKIT_OK);
    CHECK(rpmkit_render_overlays(manifest.c_str(), props.c_str(), nullptr,
                                 (dir / "overlays3").string().c_str(),
                                 "bmp") == RPMKIT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(rpmkit_last_error()) == "overlay format must be png or pgm");
}

TEST_CASE("keyframe dump driver replays records and flags malformed dumps") {
    const auto dir = make_temp_dir("kf");
    const auto dump = dir / "keyframes.jsonl";
    spit(dump, kf_line(0, 0.0, 0.0) + kf_line(5, 1.0, 4.0));

    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);
    const std::string out = (dir / "props.jsonl").string();
    REQUIRE(rpmkit_propose_keyframes(dump.string().c_str(), &rpm, out.c_str()) == RPMKIT_OK);
    CHECK(count_lines(slurp(out)) == 2);

    const auto bad = dir / "bad.jsonl";
    spit(bad, "{\"frame_id\": 0}\n");
    CHECK(rpmkit_propose_keyframes(bad.string().c_str(), &rpm, out.c_str()) ==
          RPMKIT_ERR_FORMAT);
    CHECK(std::string(rpmkit_last_error()).find("line 1") != std::string::npos);

    CHECK(rpmkit_propose_keyframes((dir / "missing.jsonl").string().c_str(), &rpm,
                                   out.c_str()) == RPMKIT_ERR_IO);
}

TEST_CASE("driver errors map onto the status enum") {
    const auto dir = make_temp_dir("errors");

    rpmkit_synth_config synth;
    rpmkit_synth_config_init(&synth);
    synth.width = 64;
    synth.height = 64;
    synth.n_tools = 1;
    synth.tool_size_min = 200;
    synth.tool_size_max = 200;
    CHECK(rpmkit_synth_generate(&synth, (dir / "seq").string().c_str()) ==
          RPMKIT_ERR_UNSATISFIABLE);
    CHECK(std::string(rpmkit_last_error()).find("tool larger than frame") != std::string::npos);

    rpmkit_detector_config det;
    rpmkit_detector_config_init(&det);
    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);

    CHECK(rpmkit_propose_manifest((dir / "missing.jsonl").string().c_str(), &det, &rpm,
                                  (dir / "out.jsonl").string().c_str()) == RPMKIT_ERR_IO);
    CHECK(std::string(rpmkit_last_error()).find("cannot open manifest") != std::string::npos);

    const auto mangled = dir / "mangled.jsonl";
    spit(mangled, "not json\n");
    CHECK(rpmkit_propose_manifest(mangled.string().c_str(), &det, &rpm,
                                  (dir / "out.jsonl").string().c_str()) == RPMKIT_ERR_FORMAT);

    const double thresholds[1] = {0.5};
    rpmkit_recall_report* report = nullptr;
    CHECK(rpmkit_evaluate((dir / "missing_props.jsonl").string().c_str(),
                          (dir / "missing_ann.json").string().c_str(), thresholds, 1,
                          &report) == RPMKIT_ERR_IO);
    CHECK(report == nullptr);
}
