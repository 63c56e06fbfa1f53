#include "taxwb/service/views.hpp"

#include "taxwb/expansion/engine.hpp"

namespace taxwb {

using nlohmann::ordered_json;

ordered_json stats_to_json(const TaxonomyStats& stats) {
  ordered_json per_depth = ordered_json::object();
  for (const auto& [depth, count] : stats.per_depth_counts) {
    per_depth[std::to_string(depth)] = count;
  }
  return {{"node_count", stats.node_count},
          {"leaf_count", stats.leaf_count},
          {"max_depth", stats.max_depth},
          {"duplicate_label_count", stats.duplicate_label_count},
          {"per_depth_counts", per_depth}};
}

ordered_json typing_result_to_json(const typing::TypingResult& result) {
  ordered_json closure = ordered_json::array();
  for (const auto& label : result.closure) closure.push_back(label.str());
  ordered_json out = {{"path", result.leaf_path.str()}, {"closure", closure}};
  if (result.score) out["score"] = *result.score;
  return out;
}

ordered_json proposal_view(const ExpansionProposal& proposal, const Taxonomy& taxonomy) {
  ordered_json diff;
  if (proposal.proposed_branch && proposal.replaced_path) {
    diff = diff_to_json(
        diff_branches(taxonomy.try_resolve(*proposal.replaced_path), *proposal.proposed_branch));
  }
  const bool current = proposal.status == ProposalStatus::pending &&
                       proposal.replaced_path && is_current(proposal, taxonomy);
  return {{"proposal", proposal_to_json(proposal)}, {"current", current}, {"diff", diff}};
}

ordered_json proposal_summary(const ExpansionProposal& proposal) {
  ordered_json target;
  if (proposal.request.target_path) target = proposal.request.target_path->str();
  if (proposal.request.new_label) target = proposal.request.new_label->str();
  return {{"id", proposal.id},
          {"status", to_string(proposal.status)},
          {"mode", to_string(proposal.request.mode)},
          {"target", target},
          {"verdict", to_string(proposal.validation.verdict)},
          {"created_at", proposal.created_at}};
}

}  // namespace taxwb
