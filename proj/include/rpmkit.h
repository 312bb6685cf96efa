/* rpmkit — real-time region proposals from tracked keypoints.
 *
 * C interface to the proposal engine: stream frames through a session, or
 * run the one-shot helpers (synthesize data, propose over a manifest or a
 * SLAM keyframe dump, evaluate recall, benchmark, render overlays).
 *
 * Conventions: every fallible call returns rpmkit_status; RPMKIT_OK is 0.
 * On failure, rpmkit_last_error() returns a thread-local message that stays
 * valid until the next failing call on the same thread. Pointers returned
 * through out-parameters are owned by the library (session results are
 * invalidated by the next call on that session; reports have destroy
 * functions). Passing NULL for any required argument yields
 * RPMKIT_ERR_INVALID_ARGUMENT.
 */
#ifndef RPMKIT_H
#define RPMKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RPMKIT_API __declspec(dllexport)
#else
#define RPMKIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rpmkit_status {
    RPMKIT_OK = 0,
    RPMKIT_ERR_INVALID_ARGUMENT = 1,
    RPMKIT_ERR_IO = 2,
    RPMKIT_ERR_FORMAT = 3,
    RPMKIT_ERR_STATE = 4,
    RPMKIT_ERR_UNSATISFIABLE = 5,
    RPMKIT_ERR_INTERNAL = 6
} rpmkit_status;

RPMKIT_API const char* rpmkit_status_name(rpmkit_status status);

/* Thread-local message for the most recent failure on this thread; never
 * NULL (empty string when no failure has occurred). */
RPMKIT_API const char* rpmkit_last_error(void);

/* ---- configuration ----------------------------------------------------- */

typedef struct rpmkit_detector_config {
    int32_t max_keypoints;  /* retained per frame across all pyramid levels */
    int32_t fast_threshold; /* FAST-9 intensity threshold */
    double scale_factor;    /* pyramid scale, > 1 */
    int32_t n_levels;
    int32_t grid_cells; /* retention grid per axis */
} rpmkit_detector_config;

RPMKIT_API void rpmkit_detector_config_init(rpmkit_detector_config* config);

#define RPMKIT_MAX_K 16
#define RPMKIT_MAX_ANCHOR_DIMS 8

typedef struct rpmkit_rpm_config {
    int32_t k_values[RPMKIT_MAX_K];
    int32_t k_count;
    double window_seconds;
    int32_t anchors_enabled; /* 0 or 1 */
    double anchor_scale_fracs[RPMKIT_MAX_ANCHOR_DIMS]; /* of min(W, H) */
    int32_t anchor_scale_count;
    double anchor_ratios[RPMKIT_MAX_ANCHOR_DIMS]; /* height / width */
    int32_t anchor_ratio_count;
    double nms_iou;
    int32_t min_cluster_points;
    double bbox_pad_frac;
    int32_t kmeans_max_iters;
    int32_t kmeans_restarts;
    uint64_t rng_seed;
} rpmkit_rpm_config;

RPMKIT_API void rpmkit_rpm_config_init(rpmkit_rpm_config* config);

typedef struct rpmkit_synth_config {
    int32_t width;
    int32_t height;
    int32_t n_frames;
    int32_t n_tools; /* 0..4 */
    int32_t tool_size_min;
    int32_t tool_size_max;
    double speed_min; /* px per frame */
    double speed_max;
    double texture_noise_sigma;
    double background_sigma; /* must stay below texture_noise_sigma */
    double fps;
    uint64_t rng_seed;
} rpmkit_synth_config;

RPMKIT_API void rpmkit_synth_config_init(rpmkit_synth_config* config);

/* ---- streaming session ------------------------------------------------- */

#define RPMKIT_SOURCE_CLUSTER_EXTENT 0
#define RPMKIT_SOURCE_ANCHOR 1

typedef struct rpmkit_proposal {
    int64_t frame_id;
    double x, y, w, h; /* axis-aligned, clipped to the frame */
    double score;      /* generating cluster population / windowed points */
    int32_t source;    /* RPMKIT_SOURCE_* */
    int32_t k;         /* K of the generating clustering run */
} rpmkit_proposal;

typedef struct rpmkit_session rpmkit_session;

RPMKIT_API rpmkit_status rpmkit_session_create(const rpmkit_detector_config* detector,
                                               const rpmkit_rpm_config* rpm,
                                               rpmkit_session** out_session);
RPMKIT_API void rpmkit_session_destroy(rpmkit_session* session);

/* Feeds one row-major 8-bit grayscale frame; frames must arrive with
 * strictly increasing timestamps. The returned array is owned by the
 * session and valid until the next process call or destroy. */
RPMKIT_API rpmkit_status rpmkit_session_process_frame(rpmkit_session* session, int64_t frame_id,
                                                      double timestamp_s, const uint8_t* pixels,
                                                      int32_t width, int32_t height,
                                                      const rpmkit_proposal** out_proposals,
                                                      size_t* out_count);

/* ---- one-shot drivers --------------------------------------------------- */

/* Writes frame_%06d.pgm, manifest.jsonl, and annotations.json to out_dir. */
RPMKIT_API rpmkit_status rpmkit_synth_generate(const rpmkit_synth_config* config,
                                               const char* out_dir);

/* Streams the manifest's frames through a fresh session and writes one
 * line-delimited proposal record per frame. */
RPMKIT_API rpmkit_status rpmkit_propose_manifest(const char* manifest_path,
                                                 const rpmkit_detector_config* detector,
                                                 const rpmkit_rpm_config* rpm,
                                                 const char* out_path);

/* Same output, but points come from an external SLAM keyframe dump; one
 * record per keyframe, windowed at that keyframe's timestamp. */
RPMKIT_API rpmkit_status rpmkit_propose_keyframes(const char* keyframes_path,
                                                  const rpmkit_rpm_config* rpm,
                                                  const char* out_path);

/* ---- evaluation --------------------------------------------------------- */

typedef struct rpmkit_recall_report rpmkit_recall_report;

RPMKIT_API rpmkit_status rpmkit_evaluate(const char* proposals_path,
                                         const char* annotations_path,
                                         const double* iou_thresholds, size_t n_thresholds,
                                         rpmkit_recall_report** out_report);

RPMKIT_API size_t rpmkit_recall_report_threshold_count(const rpmkit_recall_report* report);
RPMKIT_API double rpmkit_recall_report_threshold(const rpmkit_recall_report* report, size_t i);
RPMKIT_API double rpmkit_recall_report_recall(const rpmkit_recall_report* report, size_t i);
RPMKIT_API double rpmkit_recall_report_abo(const rpmkit_recall_report* report);
RPMKIT_API int64_t rpmkit_recall_report_ground_truth_count(const rpmkit_recall_report* report);
RPMKIT_API int64_t rpmkit_recall_report_proposal_count(const rpmkit_recall_report* report);

/* Writes the human-readable table ("-" = stdout). */
RPMKIT_API rpmkit_status rpmkit_recall_report_write_table(const rpmkit_recall_report* report,
                                                          const char* path);
/* Writes the line-delimited record form ("-" = stdout). */
RPMKIT_API rpmkit_status rpmkit_recall_report_write_records(const rpmkit_recall_report* report,
                                                            const char* path);
RPMKIT_API void rpmkit_recall_report_destroy(rpmkit_recall_report* report);

/* ---- benchmark ---------------------------------------------------------- */

typedef struct rpmkit_stage_stats {
    double mean_ms;
    double median_ms;
    double p95_ms;
} rpmkit_stage_stats;

typedef struct rpmkit_timing_report {
    rpmkit_stage_stats detect;
    rpmkit_stage_stats track;
    rpmkit_stage_stats cluster;
    rpmkit_stage_stats nms;
    rpmkit_stage_stats total;
    int64_t frames; /* measured frames, warmup excluded */
    double fps;
    int32_t width;
    int32_t height;
} rpmkit_timing_report;

RPMKIT_API rpmkit_status rpmkit_benchmark(const char* manifest_path,
                                          const rpmkit_detector_config* detector,
                                          const rpmkit_rpm_config* rpm, int32_t warmup_frames,
                                          rpmkit_timing_report* out_report);

/* Table includes the fixed reference line "paper target: 20 ms / 50 FPS". */
RPMKIT_API rpmkit_status rpmkit_timing_report_write_table(const rpmkit_timing_report* report,
                                                          const char* path);
/* include_timing_values = 0 omits run-dependent numbers so two runs can be
 * compared byte for byte. */
RPMKIT_API rpmkit_status rpmkit_timing_report_write_records(const rpmkit_timing_report* report,
                                                            const char* path,
                                                            int32_t include_timing_values);

/* ---- overlays ----------------------------------------------------------- */

/* annotations_path may be NULL (no ground-truth outlines); format is "png"
 * or "pgm". */
RPMKIT_API rpmkit_status rpmkit_render_overlays(const char* manifest_path,
                                                const char* proposals_path,
                                                const char* annotations_path,
                                                const char* out_dir, const char* format);

#ifdef __cplusplus
}
#endif

#endif /* RPMKIT_H */
