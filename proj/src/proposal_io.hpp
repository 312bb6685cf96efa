#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpm.hpp"

namespace rpmkit::rpm {

struct FrameProposals {
    int64_t frame_id = 0;
    std::vector<Proposal> proposals;
};

const char* source_name(ProposalSource source);

// One line-delimited record per frame; reals fixed at 4 decimal places so
// identical runs produce identical bytes.
void write_proposal_line(std::ostream& out, const FrameProposals& record);

std::vector<FrameProposals> read_proposal_stream(const std::filesystem::path& path);

} // namespace rpmkit::rpm
