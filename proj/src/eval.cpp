#include "eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"

namespace rpmkit::eval {

namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

int64_t require_int(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer())
        raise(Errc::format, where + " missing integer field \"" + key + "\"");
    return j[key].get<int64_t>();
}

} // namespace

AnnotationSet parse_coco(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        raise(Errc::format, "annotation document is not a JSON object");
    for (const char* key : {"images", "annotations", "categories"})
        if (!j.contains(key) || !j[key].is_array())
            raise(Errc::format, std::string("annotation document missing \"") + key +
                                    "\" array");

    AnnotationSet set;
    for (const auto& ji : j["images"]) {
        CocoImage img;
        img.id = require_int(ji, "id", "image");
        img.frame_id = require_int(ji, "frame_id", "image " + std::to_string(img.id));
        img.width = static_cast<int>(require_int(ji, "width", "image " + std::to_string(img.id)));
        img.height =
            static_cast<int>(require_int(ji, "height", "image " + std::to_string(img.id)));
        if (img.width <= 0 || img.height <= 0)
            raise(Errc::format, "image " + std::to_string(img.id) + " has non-positive size");
        set.images.push_back(img);
    }
    for (const auto& ja : j["annotations"]) {
        CocoAnnotation ann;
        ann.id = require_int(ja, "id", "annotation");
        const std::string where = "annotation " + std::to_string(ann.id);
        ann.image_id = require_int(ja, "image_id", where);
        ann.category_id = static_cast<int>(require_int(ja, "category_id", where));
        if (!ja.contains("bbox") || !ja["bbox"].is_array() || ja["bbox"].size() != 4)
            raise(Errc::format, where + " missing 4-element \"bbox\"");
        ann.box = Box{ja["bbox"][0].get<double>(), ja["bbox"][1].get<double>(),
                      ja["bbox"][2].get<double>(), ja["bbox"][3].get<double>()};
        set.annotations.push_back(ann);
    }
    for (const auto& jc : j["categories"]) {
        CocoCategory cat;
        cat.id = static_cast<int>(require_int(jc, "id", "category"));
        if (!jc.contains("name") || !jc["name"].is_string())
            raise(Errc::format, "category " + std::to_string(cat.id) + " missing \"name\"");
        cat.name = jc["name"].get<std::string>();
        set.categories.push_back(cat);
    }

    std::unordered_map<int64_t, const CocoImage*> by_image;
    for (const CocoImage& img : set.images)
        if (!by_image.emplace(img.id, &img).second)
            raise(Errc::format, "duplicate image id " + std::to_string(img.id));
    std::unordered_set<int> category_ids;
    for (const CocoCategory& cat : set.categories)
        if (!category_ids.insert(cat.id).second)
            raise(Errc::format, "duplicate category id " + std::to_string(cat.id));
    std::unordered_set<int64_t> annotation_ids;
    for (const CocoAnnotation& ann : set.annotations) {
        const std::string where = "annotation " + std::to_string(ann.id);
        if (!annotation_ids.insert(ann.id).second)
            raise(Errc::format, "duplicate annotation id " + std::to_string(ann.id));
        auto img = by_image.find(ann.image_id);
        if (img == by_image.end())
            raise(Errc::format,
                  where + " references missing image " + std::to_string(ann.image_id));
        if (!category_ids.count(ann.category_id))
            raise(Errc::format,
                  where + " references missing category " + std::to_string(ann.category_id));
        if (ann.box.w <= 0.0 || ann.box.h <= 0.0)
            raise(Errc::format, where + " has non-positive box dimensions");
        if (ann.box.x < 0.0 || ann.box.y < 0.0 || ann.box.x2() > img->second->width ||
            ann.box.y2() > img->second->height)
            raise(Errc::format, where + ": box outside image bounds");
    }
    return set;
}

AnnotationSet load_coco(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io, "cannot open annotations: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_coco(buf.str());
}

std::string serialize_coco(const AnnotationSet& set) {
    nlohmann::json j;
    j["images"] = nlohmann::json::array();
    for (const CocoImage& img : set.images)
        j["images"].push_back({{"id", img.id},
                               {"frame_id", img.frame_id},
                               {"width", img.width},
                               {"height", img.height}});
    j["annotations"] = nlohmann::json::array();
    for (const CocoAnnotation& ann : set.annotations)
        j["annotations"].push_back(
            {{"id", ann.id},
             {"image_id", ann.image_id},
             {"category_id", ann.category_id},
             {"bbox", {ann.box.x, ann.box.y, ann.box.w, ann.box.h}}});
    j["categories"] = nlohmann::json::array();
    for (const CocoCategory& cat : set.categories)
        j["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
    return j.dump();
}

void save_coco(const AnnotationSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        raise(Errc::io, "cannot write annotations: " + path.string());
    out << serialize_coco(set) << "\n";
}

RecallReport recall_at(const std::vector<rpm::FrameProposals>& proposals,
                       const AnnotationSet& annotations, const std::vector<double>& thresholds) {
    for (double t : thresholds)
        if (!(t > 0.0 && t <= 1.0))
            raise(Errc::invalid_argument, "IoU thresholds must lie in (0, 1]");

    std::unordered_map<int64_t, std::vector<const rpm::Proposal*>> by_frame;
    int64_t n_proposals = 0;
    for (const rpm::FrameProposals& rec : proposals) {
        auto& bucket = by_frame[rec.frame_id];
        for (const rpm::Proposal& p : rec.proposals) {
            bucket.push_back(&p);
            ++n_proposals;
        }
    }
    std::unordered_map<int64_t, int64_t> frame_of_image;
    for (const CocoImage& img : annotations.images)
        frame_of_image[img.id] = img.frame_id;

    // Best proposal IoU per ground-truth box, bucketed by category.
    std::unordered_map<int, std::vector<double>> best_by_category;
    std::vector<double> best_all;
    best_all.reserve(annotations.annotations.size());
    for (const CocoAnnotation& ann : annotations.annotations) {
        const int64_t frame = frame_of_image.at(ann.image_id);
        double best = 0.0;
        if (auto it = by_frame.find(frame); it != by_frame.end())
            for (const rpm::Proposal* p : it->second)
                best = std::max(best, iou(ann.box, p->box));
        best_all.push_back(best);
        best_by_category[ann.category_id].push_back(best);
    }

    auto summarize = [&](const std::vector<double>& best, std::vector<double>& recall_out,
                         double& abo_out) {
        recall_out.assign(thresholds.size(), 0.0);
        abo_out = 0.0;
        if (best.empty())
            return;
        for (size_t t = 0; t < thresholds.size(); ++t) {
            int64_t hit = 0;
            for (double b : best)
                if (b >= thresholds[t])
                    ++hit;
            recall_out[t] = static_cast<double>(hit) / static_cast<double>(best.size());
        }
        for (double b : best)
            abo_out += b;
        abo_out /= static_cast<double>(best.size());
    };

    RecallReport report;
    report.thresholds = thresholds;
    report.n_ground_truth = static_cast<int64_t>(annotations.annotations.size());
    report.n_proposals = n_proposals;
    summarize(best_all, report.recall, report.average_best_overlap);
    for (const CocoCategory& cat : annotations.categories) {
        CategoryStats stats;
        stats.category_id = cat.id;
        stats.name = cat.name;
        const auto it = best_by_category.find(cat.id);
        static const std::vector<double> kEmpty;
        const std::vector<double>& best = it == best_by_category.end() ? kEmpty : it->second;
        stats.n_ground_truth = static_cast<int64_t>(best.size());
        summarize(best, stats.recall, stats.average_best_overlap);
        report.per_category.push_back(std::move(stats));
    }
    return report;
}

std::vector<int64_t> unmatched_frame_ids(const std::vector<rpm::FrameProposals>& proposals,
                                         const AnnotationSet& annotations) {
    std::unordered_set<int64_t> known;
    for (const CocoImage& img : annotations.images)
        known.insert(img.frame_id);
    std::set<int64_t> missing;
    for (const rpm::FrameProposals& rec : proposals)
        if (!known.count(rec.frame_id))
            missing.insert(rec.frame_id);
    return {missing.begin(), missing.end()};
}

void print_recall_table(std::ostream& out, const RecallReport& report) {
    out << "ground-truth boxes: " << report.n_ground_truth
        << "   proposals: " << report.n_proposals << "\n";
    out << "  IoU threshold   recall\n";
    for (size_t t = 0; t < report.thresholds.size(); ++t) {
        char line[128];
        std::snprintf(line, sizeof(line), "  %13.2f   %.4f\n", report.thresholds[t],
                      report.recall[t]);
        out << line;
    }
    out << "  average best overlap: " << fmt4(report.average_best_overlap) << "\n";
    if (!report.per_category.empty()) {
        out << "  per category (recall at each threshold | ABO | boxes):\n";
        for (const CategoryStats& cat : report.per_category) {
            out << "    " << cat.name << " (id " << cat.category_id << "):";
            for (double r : cat.recall)
                out << " " << fmt4(r);
            out << " | " << fmt4(cat.average_best_overlap) << " | " << cat.n_ground_truth
                << "\n";
        }
    }
}

void write_recall_records(std::ostream& out, const RecallReport& report) {
    auto write_reals = [&](const std::vector<double>& vals) {
        out << "[";
        for (size_t i = 0; i < vals.size(); ++i)
            out << (i ? ", " : "") << fmt4(vals[i]);
        out << "]";
    };
    out << "{\"kind\": \"overall\", \"thresholds\": ";
    write_reals(report.thresholds);
    out << ", \"recall\": ";
    write_reals(report.recall);
    out << ", \"abo\": " << fmt4(report.average_best_overlap)
        << ", \"n_ground_truth\": " << report.n_ground_truth
        << ", \"n_proposals\": " << report.n_proposals << "}\n";
    for (const CategoryStats& cat : report.per_category) {
        out << "{\"kind\": \"category\", \"id\": " << cat.category_id << ", \"name\": \""
            << cat.name << "\", \"n_ground_truth\": " << cat.n_ground_truth << ", \"recall\": ";
        write_reals(cat.recall);
        out << ", \"abo\": " << fmt4(cat.average_best_overlap) << "}\n";
    }
}

} // namespace rpmkit::eval
