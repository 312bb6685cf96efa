#pragma once

#include <cstdint>
#include <iosfwd>

#include "features.hpp"
#include "imaging.hpp"
#include "rpm.hpp"

namespace rpmkit::bench {

struct StageStats {
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct TimingReport {
    StageStats detect;
    StageStats track;
    StageStats cluster;
    StageStats nms;
    StageStats total;
    int64_t frames = 0; // measured frames, warmup excluded
    double fps = 0.0;   // measured frames / summed per-frame wall time
    int width = 0;      // environment metadata: no hardware normalization
    int height = 0;
};

// Fixed reference point, printed for comparison and never asserted.
constexpr double kReferenceTotalMs = 20.0;
constexpr double kReferenceFps = 50.0;

// Runs the full pipeline over the manifest, single-threaded, timing each
// stage with a monotonic clock. Image decoding happens outside the timed
// sections so the numbers reflect the pipeline, not disk I/O. The first
// warmup_frames frames are processed but excluded from statistics.
TimingReport benchmark_pipeline(const imaging::FrameManifest& manifest,
                                const features::DetectorConfig& detector,
                                const rpm::RpmConfig& rpm, int warmup_frames);

void print_timing_table(std::ostream& out, const TimingReport& report);

// Line-delimited record form; pass include_timing_values = false to omit the
// run-dependent numbers (used to compare runs byte for byte).
void write_timing_records(std::ostream& out, const TimingReport& report,
                          bool include_timing_values);

} // namespace rpmkit::bench
