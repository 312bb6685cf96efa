#include "rpmkit.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "bench.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "imaging.hpp"
#include "pipeline.hpp"
#include "proposal_io.hpp"
#include "render.hpp"
#include "rpm.hpp"
#include "synth.hpp"
#include "tracking.hpp"

namespace {

thread_local std::string t_last_error;

template <typename Fn>
rpmkit_status guarded(Fn&& fn) {
    try {
        fn();
        return RPMKIT_OK;
    } catch (const rpmkit::Error& e) {
        t_last_error = e.what();
        return static_cast<rpmkit_status>(e.code()); // Errc values mirror rpmkit_status
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return RPMKIT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return RPMKIT_ERR_INTERNAL;
    }
}

rpmkit_status fail_invalid(const char* message) {
    t_last_error = message;
    return RPMKIT_ERR_INVALID_ARGUMENT;
}

rpmkit::features::DetectorConfig to_core(const rpmkit_detector_config& c) {
    rpmkit::features::DetectorConfig d;
    d.max_keypoints = c.max_keypoints;
    d.fast_threshold = c.fast_threshold;
    d.scale_factor = c.scale_factor;
    d.n_levels = c.n_levels;
    d.grid_cells = c.grid_cells;
    rpmkit::features::validate_config(d);
    return d;
}

rpmkit::rpm::RpmConfig to_core(const rpmkit_rpm_config& c) {
    if (c.k_count < 1 || c.k_count > RPMKIT_MAX_K)
        rpmkit::raise(rpmkit::Errc::invalid_argument, "k_count out of range");
    if (c.anchor_scale_count < 0 || c.anchor_scale_count > RPMKIT_MAX_ANCHOR_DIMS ||
        c.anchor_ratio_count < 0 || c.anchor_ratio_count > RPMKIT_MAX_ANCHOR_DIMS)
        rpmkit::raise(rpmkit::Errc::invalid_argument, "anchor dimension count out of range");
    rpmkit::rpm::RpmConfig r;
    r.k_list.assign(c.k_values, c.k_values + c.k_count);
    r.window_s = c.window_seconds;
    r.anchors_enabled = c.anchors_enabled != 0;
    r.anchor_scale_fracs.assign(c.anchor_scale_fracs,
                                c.anchor_scale_fracs + c.anchor_scale_count);
    r.anchor_ratios.assign(c.anchor_ratios, c.anchor_ratios + c.anchor_ratio_count);
    r.nms_iou = c.nms_iou;
    r.min_cluster_points = c.min_cluster_points;
    r.bbox_pad_frac = c.bbox_pad_frac;
    r.kmeans_max_iters = c.kmeans_max_iters;
    r.kmeans_restarts = c.kmeans_restarts;
    r.rng_seed = c.rng_seed;
    rpmkit::rpm::validate_config(r);
    return r;
}

rpmkit::synth::SynthConfig to_core(const rpmkit_synth_config& c) {
    rpmkit::synth::SynthConfig s;
    s.width = c.width;
    s.height = c.height;
    s.n_frames = c.n_frames;
    s.n_tools = c.n_tools;
    s.tool_size_min = c.tool_size_min;
    s.tool_size_max = c.tool_size_max;
    s.speed_min = c.speed_min;
    s.speed_max = c.speed_max;
    s.texture_noise_sigma = c.texture_noise_sigma;
    s.background_sigma = c.background_sigma;
    s.fps = c.fps;
    s.rng_seed = c.rng_seed;
    return s;
}

// Writes through `write` to the named file, or to stdout when path is "-".
template <typename WriteFn>
void write_to(const char* path, WriteFn&& write) {
    if (std::strcmp(path, "-") == 0) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        rpmkit::raise(rpmkit::Errc::io, std::string("cannot write: ") + path);
    write(out);
    if (!out)
        rpmkit::raise(rpmkit::Errc::io, std::string("short write: ") + path);
}

rpmkit::bench::TimingReport to_core(const rpmkit_timing_report& c) {
    rpmkit::bench::TimingReport r;
    auto stage = [](const rpmkit_stage_stats& s) {
        return rpmkit::bench::StageStats{s.mean_ms, s.median_ms, s.p95_ms};
    };
    r.detect = stage(c.detect);
    r.track = stage(c.track);
    r.cluster = stage(c.cluster);
    r.nms = stage(c.nms);
    r.total = stage(c.total);
    r.frames = c.frames;
    r.fps = c.fps;
    r.width = c.width;
    r.height = c.height;
    return r;
}

} // namespace

extern "C" {

struct rpmkit_session {
    rpmkit::pipeline::ProposalPipeline pipeline;
    std::vector<rpmkit_proposal> results;

    rpmkit_session(const rpmkit::features::DetectorConfig& d, const rpmkit::rpm::RpmConfig& r)
        : pipeline(d, r) {}
};

struct rpmkit_recall_report {
    rpmkit::eval::RecallReport report;
};

const char* rpmkit_status_name(rpmkit_status status) {
    switch (status) {
    case RPMKIT_OK:
        return "ok";
    case RPMKIT_ERR_INVALID_ARGUMENT:
        return "invalid_argument";
    case RPMKIT_ERR_IO:
        return "io";
    case RPMKIT_ERR_FORMAT:
        return "format";
    case RPMKIT_ERR_STATE:
        return "state";
    case RPMKIT_ERR_UNSATISFIABLE:
        return "unsatisfiable";
    case RPMKIT_ERR_INTERNAL:
        return "internal";
    }
    return "unknown";
}

const char* rpmkit_last_error(void) { return t_last_error.c_str(); }

void rpmkit_detector_config_init(rpmkit_detector_config* config) {
    if (!config)
        return;
    const rpmkit::features::DetectorConfig d;
    config->max_keypoints = d.max_keypoints;
    config->fast_threshold = d.fast_threshold;
    config->scale_factor = d.scale_factor;
    config->n_levels = d.n_levels;
    config->grid_cells = d.grid_cells;
}

void rpmkit_rpm_config_init(rpmkit_rpm_config* config) {
    if (!config)
        return;
    const rpmkit::rpm::RpmConfig r;
    std::memset(config, 0, sizeof(*config));
    config->k_count = static_cast<int32_t>(r.k_list.size());
    for (size_t i = 0; i < r.k_list.size(); ++i)
        config->k_values[i] = r.k_list[i];
    config->window_seconds = r.window_s;
    config->anchors_enabled = r.anchors_enabled ? 1 : 0;
    config->anchor_scale_count = static_cast<int32_t>(r.anchor_scale_fracs.size());
    for (size_t i = 0; i < r.anchor_scale_fracs.size(); ++i)
        config->anchor_scale_fracs[i] = r.anchor_scale_fracs[i];
    config->anchor_ratio_count = static_cast<int32_t>(r.anchor_ratios.size());
    for (size_t i = 0; i < r.anchor_ratios.size(); ++i)
        config->anchor_ratios[i] = r.anchor_ratios[i];
    config->nms_iou = r.nms_iou;
    config->min_cluster_points = r.min_cluster_points;
    config->bbox_pad_frac = r.bbox_pad_frac;
    config->kmeans_max_iters = r.kmeans_max_iters;
    config->kmeans_restarts = r.kmeans_restarts;
    config->rng_seed = r.rng_seed;
}

void rpmkit_synth_config_init(rpmkit_synth_config* config) {
    if (!config)
        return;
    const rpmkit::synth::SynthConfig s;
    config->width = s.width;
    config->height = s.height;
    config->n_frames = s.n_frames;
    config->n_tools = s.n_tools;
    config->tool_size_min = s.tool_size_min;
    config->tool_size_max = s.tool_size_max;
    config->speed_min = s.speed_min;
    config->speed_max = s.speed_max;
    config->texture_noise_sigma = s.texture_noise_sigma;
    config->background_sigma = s.background_sigma;
    config->fps = s.fps;
    config->rng_seed = s.rng_seed;
}

rpmkit_status rpmkit_session_create(const rpmkit_detector_config* detector,
                                    const rpmkit_rpm_config* rpm, rpmkit_session** out_session) {
    if (!detector || !rpm || !out_session)
        return fail_invalid("session_create requires detector, rpm, and out pointers");
    *out_session = nullptr;
    return guarded([&] { *out_session = new rpmkit_session(to_core(*detector), to_core(*rpm)); });
}

void rpmkit_session_destroy(rpmkit_session* session) { delete session; }

rpmkit_status rpmkit_session_process_frame(rpmkit_session* session, int64_t frame_id,
                                           double timestamp_s, const uint8_t* pixels,
                                           int32_t width, int32_t height,
                                           const rpmkit_proposal** out_proposals,
                                           size_t* out_count) {
    if (!session || !pixels || !out_proposals || !out_count)
        return fail_invalid("process_frame requires session, pixels, and out pointers");
    *out_proposals = nullptr;
    *out_count = 0;
    if (width < rpmkit::imaging::kMinFrameDim || height < rpmkit::imaging::kMinFrameDim)
        return fail_invalid("frame below minimum size");
    return guarded([&] {
        rpmkit::imaging::Frame frame;
        frame.frame_id = frame_id;
        frame.timestamp_s = timestamp_s;
        frame.width = width;
        frame.height = height;
        frame.pixels.assign(pixels, pixels + static_cast<size_t>(width) * height);

        const std::vector<rpmkit::rpm::Proposal> proposals = session->pipeline.process(frame);
        session->results.clear();
        session->results.reserve(proposals.size());
        for (const rpmkit::rpm::Proposal& p : proposals)
            session->results.push_back(rpmkit_proposal{
                frame_id, p.box.x, p.box.y, p.box.w, p.box.h, p.score,
                p.source == rpmkit::rpm::ProposalSource::cluster_extent
                    ? RPMKIT_SOURCE_CLUSTER_EXTENT
                    : RPMKIT_SOURCE_ANCHOR,
                p.k});
        *out_proposals = session->results.data();
        *out_count = session->results.size();
    });
}

rpmkit_status rpmkit_synth_generate(const rpmkit_synth_config* config, const char* out_dir) {
    if (!config || !out_dir)
        return fail_invalid("synth_generate requires config and out_dir");
    return guarded([&] { rpmkit::synth::generate_sequence(to_core(*config), out_dir); });
}

rpmkit_status rpmkit_propose_manifest(const char* manifest_path,
                                      const rpmkit_detector_config* detector,
                                      const rpmkit_rpm_config* rpm, const char* out_path) {
    if (!manifest_path || !detector || !rpm || !out_path)
        return fail_invalid("propose_manifest requires manifest, configs, and out path");
    return guarded([&] {
        const rpmkit::imaging::FrameManifest manifest =
            rpmkit::imaging::load_manifest(manifest_path);
        const auto d = to_core(*detector);
        const auto r = to_core(*rpm);
        write_to(out_path,
                 [&](std::ostream& out) { rpmkit::pipeline::propose_manifest(manifest, d, r, out); });
    });
}

rpmkit_status rpmkit_propose_keyframes(const char* keyframes_path, const rpmkit_rpm_config* rpm,
                                       const char* out_path) {
    if (!keyframes_path || !rpm || !out_path)
        return fail_invalid("propose_keyframes requires input, config, and out path");
    return guarded([&] {
        const rpmkit::tracking::MapStore store =
            rpmkit::tracking::ingest_external_keyframes(keyframes_path);
        const auto r = to_core(*rpm);
        write_to(out_path,
                 [&](std::ostream& out) { rpmkit::pipeline::propose_keyframes(store, r, out); });
    });
}

rpmkit_status rpmkit_evaluate(const char* proposals_path, const char* annotations_path,
                              const double* iou_thresholds, size_t n_thresholds,
                              rpmkit_recall_report** out_report) {
    if (!proposals_path || !annotations_path || !iou_thresholds || n_thresholds == 0 ||
        !out_report)
        return fail_invalid("evaluate requires proposals, annotations, thresholds, and out");
    *out_report = nullptr;
    return guarded([&] {
        const auto proposals = rpmkit::rpm::read_proposal_stream(proposals_path);
        const auto annotations = rpmkit::eval::load_coco(annotations_path);
        const auto missing = rpmkit::eval::unmatched_frame_ids(proposals, annotations);
        if (!missing.empty()) {
            std::string ids;
            for (size_t i = 0; i < missing.size(); ++i)
                ids += (i ? ", " : "") + std::to_string(missing[i]);
            rpmkit::raise(rpmkit::Errc::invalid_argument,
                          "proposal frame ids missing from annotations: " + ids);
        }
        const std::vector<double> thresholds(iou_thresholds, iou_thresholds + n_thresholds);
        auto* report = new rpmkit_recall_report{
            rpmkit::eval::recall_at(proposals, annotations, thresholds)};
        *out_report = report;
    });
}

size_t rpmkit_recall_report_threshold_count(const rpmkit_recall_report* report) {
    return report ? report->report.thresholds.size() : 0;
}

double rpmkit_recall_report_threshold(const rpmkit_recall_report* report, size_t i) {
    return report && i < report->report.thresholds.size() ? report->report.thresholds[i] : 0.0;
}

double rpmkit_recall_report_recall(const rpmkit_recall_report* report, size_t i) {
    return report && i < report->report.recall.size() ? report->report.recall[i] : 0.0;
}

double rpmkit_recall_report_abo(const rpmkit_recall_report* report) {
    return report ? report->report.average_best_overlap : 0.0;
}

int64_t rpmkit_recall_report_ground_truth_count(const rpmkit_recall_report* report) {
    return report ? report->report.n_ground_truth : 0;
}

int64_t rpmkit_recall_report_proposal_count(const rpmkit_recall_report* report) {
    return report ? report->report.n_proposals : 0;
}

rpmkit_status rpmkit_recall_report_write_table(const rpmkit_recall_report* report,
                                               const char* path) {
    if (!report || !path)
        return fail_invalid("report_write_table requires report and path");
    return guarded([&] {
        write_to(path,
                 [&](std::ostream& out) { rpmkit::eval::print_recall_table(out, report->report); });
    });
}

rpmkit_status rpmkit_recall_report_write_records(const rpmkit_recall_report* report,
                                                 const char* path) {
    if (!report || !path)
        return fail_invalid("report_write_records requires report and path");
    return guarded([&] {
        write_to(path, [&](std::ostream& out) {
            rpmkit::eval::write_recall_records(out, report->report);
        });
    });
}

void rpmkit_recall_report_destroy(rpmkit_recall_report* report) { delete report; }

rpmkit_status rpmkit_benchmark(const char* manifest_path, const rpmkit_detector_config* detector,
                               const rpmkit_rpm_config* rpm, int32_t warmup_frames,
                               rpmkit_timing_report* out_report) {
    if (!manifest_path || !detector || !rpm || !out_report)
        return fail_invalid("benchmark requires manifest, configs, and out report");
    return guarded([&] {
        const rpmkit::imaging::FrameManifest manifest =
            rpmkit::imaging::load_manifest(manifest_path);
        const rpmkit::bench::TimingReport r = rpmkit::bench::benchmark_pipeline(
            manifest, to_core(*detector), to_core(*rpm), warmup_frames);
        auto stage = [](const rpmkit::bench::StageStats& s) {
            return rpmkit_stage_stats{s.mean_ms, s.median_ms, s.p95_ms};
        };
        out_report->detect = stage(r.detect);
        out_report->track = stage(r.track);
        out_report->cluster = stage(r.cluster);
        out_report->nms = stage(r.nms);
        out_report->total = stage(r.total);
        out_report->frames = r.frames;
        out_report->fps = r.fps;
        out_report->width = r.width;
        out_report->height = r.height;
    });
}

rpmkit_status rpmkit_timing_report_write_table(const rpmkit_timing_report* report,
                                               const char* path) {
    if (!report || !path)
        return fail_invalid("timing_write_table requires report and path");
    return guarded([&] {
        const rpmkit::bench::TimingReport r = to_core(*report);
        write_to(path, [&](std::ostream& out) { rpmkit::bench::print_timing_table(out, r); });
    });
}

rpmkit_status rpmkit_timing_report_write_records(const rpmkit_timing_report* report,
                                                 const char* path,
                                                 int32_t include_timing_values) {
    if (!report || !path)
        return fail_invalid("timing_write_records requires report and path");
    return guarded([&] {
        const rpmkit::bench::TimingReport r = to_core(*report);
        write_to(path, [&](std::ostream& out) {
            rpmkit::bench::write_timing_records(out, r, include_timing_values != 0);
        });
    });
}

rpmkit_status rpmkit_render_overlays(const char* manifest_path, const char* proposals_path,
                                     const char* annotations_path, const char* out_dir,
                                     const char* format) {
    if (!manifest_path || !proposals_path || !out_dir || !format)
        return fail_invalid("render_overlays requires manifest, proposals, out_dir, format");
    return guarded([&] {
        const rpmkit::imaging::FrameManifest manifest =
            rpmkit::imaging::load_manifest(manifest_path);
        const auto proposals = rpmkit::rpm::read_proposal_stream(proposals_path);
        rpmkit::eval::AnnotationSet gt;
        const rpmkit::eval::AnnotationSet* gt_ptr = nullptr;
        if (annotations_path) {
            gt = rpmkit::eval::load_coco(annotations_path);
            gt_ptr = &gt;
        }
        rpmkit::render::render_overlays(manifest, proposals, gt_ptr, out_dir, format);
    });
}

} // extern "C"
