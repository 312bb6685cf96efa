#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "proposal_io.hpp"

namespace rpmkit::eval {

struct CocoImage {
    int64_t id = 0;
    int64_t frame_id = 0;
    int width = 0;
    int height = 0;

    bool operator==(const CocoImage&) const = default;
};

struct CocoAnnotation {
    int64_t id = 0;
    int64_t image_id = 0;
    int category_id = 0;
    Box box; // [x, y, w, h]

    bool operator==(const CocoAnnotation&) const = default;
};

struct CocoCategory {
    int id = 0;
    std::string name;

    bool operator==(const CocoCategory&) const = default;
};

struct AnnotationSet {
    std::vector<CocoImage> images;
    std::vector<CocoAnnotation> annotations;
    std::vector<CocoCategory> categories;

    bool operator==(const AnnotationSet&) const = default;
};

// COCO-style subset: images / annotations (with "bbox") / categories.
// Validation failures name the offending ids.
AnnotationSet parse_coco(const std::string& text);
AnnotationSet load_coco(const std::filesystem::path& path);
std::string serialize_coco(const AnnotationSet& set);
void save_coco(const AnnotationSet& set, const std::filesystem::path& path);

struct CategoryStats {
    int category_id = 0;
    std::string name;
    int64_t n_ground_truth = 0;
    std::vector<double> recall; // parallel to RecallReport::thresholds
    double average_best_overlap = 0.0;
};

struct RecallReport {
    std::vector<double> thresholds;
    std::vector<double> recall; // parallel to thresholds
    double average_best_overlap = 0.0;
    int64_t n_ground_truth = 0;
    int64_t n_proposals = 0;
    std::vector<CategoryStats> per_category;
};

// Class-agnostic proposal recall: a ground-truth box counts as recalled at
// threshold t when any proposal on its frame reaches IoU >= t (proposals may
// serve several ground-truth boxes). ABO averages each box's best IoU.
// Frames that have proposals but no ground truth do not affect the metrics.
RecallReport recall_at(const std::vector<rpm::FrameProposals>& proposals,
                       const AnnotationSet& annotations, const std::vector<double>& thresholds);

// Proposal-stream frame ids with no matching annotation image.
std::vector<int64_t> unmatched_frame_ids(const std::vector<rpm::FrameProposals>& proposals,
                                         const AnnotationSet& annotations);

void print_recall_table(std::ostream& out, const RecallReport& report);
void write_recall_records(std::ostream& out, const RecallReport& report);

} // namespace rpmkit::eval
