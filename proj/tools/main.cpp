#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rpmkit.h>

namespace {

int fail(rpmkit_status status) {
    std::fprintf(stderr, "error: %s (%s)\n", rpmkit_last_error(), rpmkit_status_name(status));
    return 1;
}

// RPMKIT_SEED provides the default seed; an explicit --seed flag wins.
uint64_t env_default_seed() {
    const char* env = std::getenv("RPMKIT_SEED");
    if (!env || !*env)
        return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw CLI::ValidationError("RPMKIT_SEED", "RPMKIT_SEED must be an unsigned integer");
    return v;
}

struct ProposeOptions {
    std::string manifest;
    std::string keyframes;
    std::string out;
    std::vector<int32_t> k_list;
    double window_seconds = 0.0;
    bool no_anchors = false;
    double nms_iou = 0.0;
    int32_t max_keypoints = 0;
    int32_t levels = 0;
    double scale_factor = 0.0;
    uint64_t seed = 0;
};

// Shared by propose and bench: pipeline configuration flags with defaults
// pulled from the library so the two stay in lockstep.
void add_pipeline_flags(CLI::App* cmd, ProposeOptions& opt, rpmkit_detector_config& detector,
                        rpmkit_rpm_config& rpm, uint64_t default_seed) {
    opt.k_list.assign(rpm.k_values, rpm.k_values + rpm.k_count);
    opt.window_seconds = rpm.window_seconds;
    opt.nms_iou = rpm.nms_iou;
    opt.max_keypoints = detector.max_keypoints;
    opt.levels = detector.n_levels;
    opt.scale_factor = detector.scale_factor;
    opt.seed = default_seed;

    cmd->add_option("--window-seconds", opt.window_seconds,
                    "keyframe window length in seconds")
        ->capture_default_str();
    cmd->add_option("--k-list", opt.k_list, "comma-separated K values for clustering")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--no-anchors", opt.no_anchors, "emit cluster extents only, no anchors");
    cmd->add_option("--nms-iou", opt.nms_iou, "suppression IoU threshold")
        ->capture_default_str();
    cmd->add_option("--max-keypoints", opt.max_keypoints, "keypoint budget per frame")
        ->capture_default_str();
    cmd->add_option("--levels", opt.levels, "pyramid levels")->capture_default_str();
    cmd->add_option("--scale-factor", opt.scale_factor, "pyramid scale factor")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "clustering seed (default from RPMKIT_SEED)")
        ->capture_default_str();
}

void apply_pipeline_flags(const ProposeOptions& opt, rpmkit_detector_config& detector,
                          rpmkit_rpm_config& rpm) {
    if (opt.k_list.empty() || opt.k_list.size() > RPMKIT_MAX_K)
        throw CLI::ValidationError("--k-list",
                                   "expects between 1 and " + std::to_string(RPMKIT_MAX_K) +
                                       " values");
    rpm.k_count = static_cast<int32_t>(opt.k_list.size());
    for (size_t i = 0; i < opt.k_list.size(); ++i)
        rpm.k_values[i] = opt.k_list[i];
    rpm.window_seconds = opt.window_seconds;
    rpm.anchors_enabled = opt.no_anchors ? 0 : 1;
    rpm.nms_iou = opt.nms_iou;
    rpm.rng_seed = opt.seed;
    detector.max_keypoints = opt.max_keypoints;
    detector.n_levels = opt.levels;
    detector.scale_factor = opt.scale_factor;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rpmkit — region proposals from tracked keypoints"};
    app.require_subcommand(1);

    rpmkit_detector_config detector;
    rpmkit_detector_config_init(&detector);
    rpmkit_rpm_config rpm;
    rpmkit_rpm_config_init(&rpm);
    rpmkit_synth_config synth;
    rpmkit_synth_config_init(&synth);

    int exit_code = 0;

    try {
        const uint64_t default_seed = env_default_seed();

        // ---- synth ----
        auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic sequence");
        std::string synth_out;
        synth.rng_seed = default_seed;
        cmd_synth->add_option("--out", synth_out, "output directory")->required();
        cmd_synth->add_option("--width", synth.width, "frame width")->capture_default_str();
        cmd_synth->add_option("--height", synth.height, "frame height")->capture_default_str();
        cmd_synth->add_option("--frames", synth.n_frames, "number of frames")
            ->capture_default_str();
        cmd_synth->add_option("--tools", synth.n_tools, "number of moving tools")
            ->check(CLI::Range(0, 4))
            ->capture_default_str();
        cmd_synth->add_option("--tool-size-min", synth.tool_size_min, "smallest tool side, px")
            ->capture_default_str();
        cmd_synth->add_option("--tool-size-max", synth.tool_size_max, "largest tool side, px")
            ->capture_default_str();
        cmd_synth->add_option("--speed-min", synth.speed_min, "slowest tool speed, px/frame")
            ->capture_default_str();
        cmd_synth->add_option("--speed-max", synth.speed_max, "fastest tool speed, px/frame")
            ->capture_default_str();
        cmd_synth
            ->add_option("--texture-sigma", synth.texture_noise_sigma, "tool texture contrast")
            ->capture_default_str();
        cmd_synth
            ->add_option("--background-sigma", synth.background_sigma, "background noise level")
            ->capture_default_str();
        cmd_synth->add_option("--fps", synth.fps, "timestamps advance at this rate")
            ->capture_default_str();
        cmd_synth->add_option("--seed", synth.rng_seed, "generator seed (default RPMKIT_SEED)")
            ->capture_default_str();
        cmd_synth->callback([&] {
            if (synth.tool_size_min > synth.tool_size_max)
                throw CLI::ValidationError("--tool-size-min", "exceeds --tool-size-max");
            if (synth.speed_min > synth.speed_max)
                throw CLI::ValidationError("--speed-min", "exceeds --speed-max");
            const rpmkit_status st = rpmkit_synth_generate(&synth, synth_out.c_str());
            if (st != RPMKIT_OK) {
                exit_code = fail(st);
                return;
            }
            std::printf("wrote %s/manifest.jsonl\n", synth_out.c_str());
            std::printf("wrote %s/annotations.json\n", synth_out.c_str());
            std::printf("wrote %s/frame_000000.pgm .. frame_%06d.pgm\n", synth_out.c_str(),
                        synth.n_frames - 1);
        });

        // ---- propose ----
        auto* cmd_propose =
            app.add_subcommand("propose", "stream a sequence into region proposals");
        ProposeOptions propose;
        auto* manifest_opt =
            cmd_propose->add_option("--manifest", propose.manifest, "frame manifest (JSONL)");
        auto* keyframes_opt = cmd_propose->add_option(
            "--keyframes", propose.keyframes, "external SLAM keyframe dump (JSONL)");
        manifest_opt->excludes(keyframes_opt);
        keyframes_opt->excludes(manifest_opt);
        cmd_propose->add_option("--out", propose.out, "proposal stream output path")
            ->required();
        add_pipeline_flags(cmd_propose, propose, detector, rpm, default_seed);
        cmd_propose->callback([&] {
            if (propose.manifest.empty() == propose.keyframes.empty())
                throw CLI::ValidationError(
                    "--manifest", "exactly one of --manifest or --keyframes is required");
            apply_pipeline_flags(propose, detector, rpm);
            const rpmkit_status st =
                propose.manifest.empty()
                    ? rpmkit_propose_keyframes(propose.keyframes.c_str(), &rpm,
                                               propose.out.c_str())
                    : rpmkit_propose_manifest(propose.manifest.c_str(), &detector, &rpm,
                                              propose.out.c_str());
            if (st != RPMKIT_OK) {
                exit_code = fail(st);
                return;
            }
            std::printf("wrote %s\n", propose.out.c_str());
        });

        // ---- eval ----
        auto* cmd_eval = app.add_subcommand("eval", "score a proposal stream against COCO GT");
        std::string eval_proposals, eval_annotations, eval_out;
        std::vector<double> thresholds = {0.5, 0.7, 0.9};
        cmd_eval->add_option("--proposals", eval_proposals, "proposal stream (JSONL)")
            ->required();
        cmd_eval->add_option("--annotations", eval_annotations, "COCO-style ground truth")
            ->required();
        cmd_eval->add_option("--iou-thresholds", thresholds, "comma-separated IoU thresholds")
            ->delimiter(',')
            ->capture_default_str();
        cmd_eval->add_option("--out", eval_out, "also write line-delimited records here");
        cmd_eval->callback([&] {
            if (thresholds.empty())
                throw CLI::ValidationError("--iou-thresholds", "needs at least one value");
            rpmkit_recall_report* report = nullptr;
            rpmkit_status st = rpmkit_evaluate(eval_proposals.c_str(), eval_annotations.c_str(),
                                               thresholds.data(), thresholds.size(), &report);
            if (st != RPMKIT_OK) {
                exit_code = fail(st);
                return;
            }
            st = rpmkit_recall_report_write_table(report, "-");
            if (st == RPMKIT_OK && !eval_out.empty())
                st = rpmkit_recall_report_write_records(report, eval_out.c_str());
            rpmkit_recall_report_destroy(report);
            if (st != RPMKIT_OK)
                exit_code = fail(st);
        });

        // ---- bench ----
        auto* cmd_bench = app.add_subcommand("bench", "time the pipeline over a manifest");
        ProposeOptions bench;
        std::string bench_manifest, bench_out;
        int32_t warmup = 10;
        bool no_timing_values = false;
        cmd_bench->add_option("--manifest", bench_manifest, "frame manifest (JSONL)")
            ->required();
        cmd_bench->add_option("--warmup", warmup, "frames excluded from statistics")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd_bench->add_option("--out", bench_out, "also write line-delimited records here");
        cmd_bench->add_flag("--no-timing-values", no_timing_values,
                            "omit run-dependent numbers from the record file");
        add_pipeline_flags(cmd_bench, bench, detector, rpm, default_seed);
        cmd_bench->callback([&] {
            apply_pipeline_flags(bench, detector, rpm);
            rpmkit_timing_report report;
            rpmkit_status st =
                rpmkit_benchmark(bench_manifest.c_str(), &detector, &rpm, warmup, &report);
            if (st != RPMKIT_OK) {
                exit_code = fail(st);
                return;
            }
            st = rpmkit_timing_report_write_table(&report, "-");
            if (st == RPMKIT_OK && !bench_out.empty())
                st = rpmkit_timing_report_write_records(&report, bench_out.c_str(),
                                                        no_timing_values ? 0 : 1);
            if (st != RPMKIT_OK)
                exit_code = fail(st);
        });

        // ---- render ----
        auto* cmd_render = app.add_subcommand("render", "draw proposal overlays onto frames");
        std::string render_manifest, render_proposals, render_gt, render_out;
        std::string render_format = "png";
        cmd_render->add_option("--manifest", render_manifest, "frame manifest (JSONL)")
            ->required();
        cmd_render->add_option("--proposals", render_proposals, "proposal stream (JSONL)")
            ->required();
        cmd_render->add_option("--gt", render_gt, "COCO ground truth to outline at gray 128");
        cmd_render->add_option("--out", render_out, "output directory")->required();
        cmd_render->add_option("--format", render_format, "overlay image format")
            ->check(CLI::IsMember({"png", "pgm"}))
            ->capture_default_str();
        cmd_render->callback([&] {
            const rpmkit_status st = rpmkit_render_overlays(
                render_manifest.c_str(), render_proposals.c_str(),
                render_gt.empty() ? nullptr : render_gt.c_str(), render_out.c_str(),
                render_format.c_str());
            if (st != RPMKIT_OK) {
                exit_code = fail(st);
                return;
            }
            std::printf("wrote overlays to %s\n", render_out.c_str());
        });

        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // help exits clean; every other parse problem is usage
    }

    return exit_code;
}
