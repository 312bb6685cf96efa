#include "proposal_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace rpmkit::rpm {

namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

const char* source_name(ProposalSource source) {
    return source == ProposalSource::cluster_extent ? "cluster_extent" : "anchor";
}

void write_proposal_line(std::ostream& out, const FrameProposals& record) {
    out << "{\"frame_id\": " << record.frame_id << ", \"proposals\": [";
    for (size_t i = 0; i < record.proposals.size(); ++i) {
        const Proposal& p = record.proposals[i];
        if (i)
            out << ", ";
        out << "{\"x\": " << fmt4(p.box.x) << ", \"y\": " << fmt4(p.box.y)
            << ", \"w\": " << fmt4(p.box.w) << ", \"h\": " << fmt4(p.box.h)
            << ", \"score\": " << fmt4(p.score) << ", \"source\": \"" << source_name(p.source)
            << "\", \"k\": " << p.k << "}";
    }
    out << "]}\n";
}

std::vector<FrameProposals> read_proposal_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io, "cannot open proposal stream: " + path.string());

    std::vector<FrameProposals> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("frame_id") ||
            !j.contains("proposals") || !j["proposals"].is_array())
            raise(Errc::format,
                  "malformed proposal record at line " + std::to_string(line_no));
        FrameProposals rec;
        rec.frame_id = j["frame_id"].get<int64_t>();
        for (const auto& jp : j["proposals"]) {
            if (!jp.is_object() || !jp.contains("x") || !jp.contains("y") || !jp.contains("w") ||
                !jp.contains("h") || !jp.contains("score") || !jp.contains("source") ||
                !jp.contains("k"))
                raise(Errc::format,
                      "malformed proposal record at line " + std::to_string(line_no));
            Proposal p;
            p.box = Box{jp["x"].get<double>(), jp["y"].get<double>(), jp["w"].get<double>(),
                        jp["h"].get<double>()};
            p.score = jp["score"].get<double>();
            const std::string src = jp["source"].get<std::string>();
            if (src == "cluster_extent")
                p.source = ProposalSource::cluster_extent;
            else if (src == "anchor")
                p.source = ProposalSource::anchor;
            else
                raise(Errc::format, "unknown proposal source \"" + src + "\" at line " +
                                        std::to_string(line_no));
            p.k = jp["k"].get<int>();
            rec.proposals.push_back(p);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace rpmkit::rpm
