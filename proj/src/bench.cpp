#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "error.hpp"
#include "pipeline.hpp"

namespace rpmkit::bench {

namespace {

StageStats summarize(std::vector<double> samples) {
    StageStats s;
    if (samples.empty())
        return s;
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    s.mean_ms = sum / static_cast<double>(samples.size());
    std::sort(samples.begin(), samples.end());
    const size_t n = samples.size();
    s.median_ms = (n % 2 == 1) ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    // nearest-rank p95
    const size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95_ms = samples[std::max<size_t>(rank, 1) - 1];
    return s;
}

void print_stage(std::ostream& out, const char* name, const StageStats& s) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %-8s mean %8.3f ms   median %8.3f ms   p95 %8.3f ms\n",
                  name, s.mean_ms, s.median_ms, s.p95_ms);
    out << line;
}

void write_stage_record(std::ostream& out, const char* name, const StageStats& s,
                        bool include_timing_values) {
    out << "{\"kind\": \"stage\", \"name\": \"" << name << "\"";
    if (include_timing_values) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      ", \"mean_ms\": %.4f, \"median_ms\": %.4f, \"p95_ms\": %.4f", s.mean_ms,
                      s.median_ms, s.p95_ms);
        out << buf;
    }
    out << "}\n";
}

} // namespace

TimingReport benchmark_pipeline(const imaging::FrameManifest& manifest,
                                const features::DetectorConfig& detector,
                                const rpm::RpmConfig& rpm, int warmup_frames) {
    if (warmup_frames < 0)
        raise(Errc::invalid_argument, "warmup frame count must be non-negative");
    if (manifest.entries.size() < static_cast<size_t>(warmup_frames) + 10)
        raise(Errc::invalid_argument,
              "benchmark needs at least warmup + 10 frames, got " +
                  std::to_string(manifest.entries.size()));

    pipeline::ProposalPipeline pipe(detector, rpm);
    std::vector<double> detect, track, cluster, nms, total;
    TimingReport report;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        const imaging::Frame frame = imaging::load_frame(manifest, manifest.entries[i]);
        report.width = frame.width;
        report.height = frame.height;
        pipeline::StageTimes st;
        pipe.process(frame, &st);
        if (i < static_cast<size_t>(warmup_frames))
            continue;
        detect.push_back(st.detect_ms);
        track.push_back(st.track_ms);
        cluster.push_back(st.cluster_ms);
        nms.push_back(st.nms_ms);
        total.push_back(st.total_ms);
    }

    report.frames = static_cast<int64_t>(total.size());
    report.detect = summarize(std::move(detect));
    report.track = summarize(std::move(track));
    report.cluster = summarize(std::move(cluster));
    report.nms = summarize(std::move(nms));
    double total_sum_ms = 0.0;
    for (double v : total)
        total_sum_ms += v;
    report.total = summarize(std::move(total));
    report.fps = total_sum_ms > 0.0
                     ? static_cast<double>(report.frames) / (total_sum_ms / 1000.0)
                     : 0.0;
    return report;
}

void print_timing_table(std::ostream& out, const TimingReport& report) {
    out << "benchmark: " << report.frames << " measured frames at " << report.width << "x"
        << report.height << ", single-threaded\n";
    print_stage(out, "detect", report.detect);
    print_stage(out, "track", report.track);
    print_stage(out, "cluster", report.cluster);
    print_stage(out, "nms", report.nms);
    print_stage(out, "total", report.total);
    char line[96];
    std::snprintf(line, sizeof(line), "  fps: %.2f\n", report.fps);
    out << line;
    out << "  paper target: 20 ms / 50 FPS\n";
}

void write_timing_records(std::ostream& out, const TimingReport& report,
                          bool include_timing_values) {
    out << "{\"kind\": \"bench_meta\", \"frames\": " << report.frames
        << ", \"width\": " << report.width << ", \"height\": " << report.height
        << ", \"single_threaded\": true, \"reference_total_ms\": 20.0, \"reference_fps\": 50.0}"
        << "\n";
    write_stage_record(out, "detect", report.detect, include_timing_values);
    write_stage_record(out, "track", report.track, include_timing_values);
    write_stage_record(out, "cluster", report.cluster, include_timing_values);
    write_stage_record(out, "nms", report.nms, include_timing_values);
    write_stage_record(out, "total", report.total, include_timing_values);
    out << "{\"kind\": \"fps\"";
    if (include_timing_values) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), ", \"value\": %.4f", report.fps);
        out << buf;
    }
    out << "}\n";
}

} // namespace rpmkit::bench
