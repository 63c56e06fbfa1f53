#pragma once

// JSON shapes shared by the CLI and the HTTP API.

#include <json.hpp>

#include "taxwb/core/taxonomy.hpp"
#include "taxwb/expansion/proposal.hpp"
#include "taxwb/typing/typing.hpp"

namespace taxwb {

nlohmann::ordered_json stats_to_json(const TaxonomyStats& stats);

/// {path, closure, score?}
nlohmann::ordered_json typing_result_to_json(const typing::TypingResult& result);

/// {proposal, current, diff}: diff compares the proposed branch with what
/// the replaced path holds in taxonomy now (null for failed proposals).
nlohmann::ordered_json proposal_view(const ExpansionProposal& proposal, const Taxonomy& taxonomy);

/// {id, status, mode, target, verdict, created_at}
nlohmann::ordered_json proposal_summary(const ExpansionProposal& proposal);

}  // namespace taxwb
