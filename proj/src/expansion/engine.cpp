#include "taxwb/expansion/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>

#include "taxwb/llm/response_parser.hpp"

namespace taxwb {
namespace {

bool is_reply_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::no_json_found:
    case ErrorCode::schema_violation:
    case ErrorCode::root_mismatch:
    case ErrorCode::sibling_duplicate:
    case ErrorCode::empty_label:
    case ErrorCode::invalid_label:
      return true;
    default:
      return false;
  }
}

void mark_failed(ExpansionProposal& proposal, const Error& error) {
  proposal.status = ProposalStatus::failed;
  proposal.error = error.code();
  proposal.error_message = error.what();
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

StaleProposal::StaleProposal(ExpansionProposal proposal)
    : Error(ErrorCode::stale_proposal,
            "proposal " + proposal.id + " is superseded: '" +
                (proposal.replaced_path ? proposal.replaced_path->str() : std::string("?")) +
                "' changed after it was made"),
      proposal_(std::move(proposal)) {}

ExpansionEngine::ExpansionEngine(llm::ChatBackend& backend, llm::TemplateLibrary templates,
                                 EngineConfig config,
                                 std::optional<VocabularyConstraint> vocabulary, Clock clock)
    : backend_(backend),
      templates_(std::move(templates)),
      config_(config),
      vocabulary_(std::move(vocabulary)),
      clock_(std::move(clock)) {}

std::string ExpansionEngine::next_id() {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "p%04llu",
                static_cast<unsigned long long>(++counter_));
  return buffer;
}

ExpansionProposal ExpansionEngine::start(const ExpansionRequest& request) {
  request.check();
  ExpansionProposal proposal;
  proposal.id = next_id();
  proposal.request = request;
  proposal.created_at = clock_();
  return proposal;
}

std::string ExpansionEngine::ask(const std::string& prompt) {
  llm::ChatRequest chat;
  chat.prompt = prompt;
  chat.max_output_tokens = config_.max_output_tokens;
  chat.temperature = config_.temperature;
  return backend_.complete(chat).text;
}

ExpansionProposal ExpansionEngine::propose_expansion(const Taxonomy& taxonomy,
                                                     const ExpansionRequest& request) {
  if (request.mode != RequestMode::expand_subtree) {
    throw Error(ErrorCode::invariant_violation, "propose_expansion needs an expand request");
  }
  request.check();
  const TypePath& target = *request.target_path;
  const TypeNode& current = taxonomy.resolve(target);
  const TypeNode context = extract_context_subset(
      taxonomy, target, std::max(config_.context_budget, target.depth()));
  const std::string prompt =
      llm::render_expand_prompt(templates_.get(llm::kExpandTemplate), context, target,
                                request.instructions, request.grounding);

  ExpansionProposal proposal = start(request);
  if (proposal.request.base_version == 0) proposal.request.base_version = taxonomy.version();
  proposal.replaced_path = target;
  proposal.base_branch = current;
  proposal.raw_response = ask(prompt);
  try {
    proposal.proposed_branch = llm::parse_branch_response(proposal.raw_response, target.leaf());
  } catch (const Error& e) {
    if (!is_reply_error(e.code())) throw;
    mark_failed(proposal, e);
    return proposal;
  }
  proposal.validation = validate(proposal, taxonomy);
  return proposal;
}

ExpansionProposal ExpansionEngine::propose_insertion(const Taxonomy& taxonomy,
                                                     const ExpansionRequest& request) {
  if (request.mode != RequestMode::insert_type) {
    throw Error(ErrorCode::invariant_violation, "propose_insertion needs an insert request");
  }
  request.check();
  const Label& new_label = *request.new_label;
  const TypeNode context =
      extract_context_subset(taxonomy, taxonomy.root_path(), config_.context_budget);
  const std::string prompt = llm::render_insert_prompt(templates_.get(llm::kInsertTemplate),
                                                       context, new_label,
                                                       request.instructions);

  ExpansionProposal proposal = start(request);
  if (proposal.request.base_version == 0) proposal.request.base_version = taxonomy.version();
  proposal.raw_response = ask(prompt);

  llm::InsertionResponse reply{taxonomy.root_path(), std::nullopt};
  try {
    reply = llm::parse_insertion_response(proposal.raw_response);
  } catch (const Error& e) {
    if (!is_reply_error(e.code())) throw;
    mark_failed(proposal, e);
    return proposal;
  }

  std::optional<TypePath> placement;
  if (taxonomy.try_resolve(reply.placement) != nullptr) {
    placement = reply.placement;
  } else if (reply.placement.root() != taxonomy.root().label()) {
    std::vector<Label> rooted{taxonomy.root().label()};
    rooted.insert(rooted.end(), reply.placement.segments().begin(),
                  reply.placement.segments().end());
    TypePath candidate(std::move(rooted));
    if (taxonomy.try_resolve(candidate) != nullptr) placement = std::move(candidate);
  }
  if (!placement) {
    mark_failed(proposal, Error(ErrorCode::placement_unresolvable,
                                "placement '" + reply.placement.str() +
                                    "' does not resolve in the taxonomy"));
    return proposal;
  }

  const TypeNode& current = *taxonomy.try_resolve(*placement);
  proposal.placement_path = placement;
  proposal.replaced_path = placement;
  proposal.base_branch = current;
  if (reply.branch) {
    proposal.proposed_branch = std::move(reply.branch);
  } else if (current.find_child(new_label) != nullptr) {
    proposal.proposed_branch = current;
  } else {
    proposal.proposed_branch = current.with_appended_child(TypeNode(new_label));
  }
  proposal.validation = validate(proposal, taxonomy);
  return proposal;
}

ExpansionProposal ExpansionEngine::propose(const Taxonomy& taxonomy,
                                           const ExpansionRequest& request) {
  return request.mode == RequestMode::expand_subtree ? propose_expansion(taxonomy, request)
                                                     : propose_insertion(taxonomy, request);
}

ValidationReport ExpansionEngine::validate(const ExpansionProposal& proposal,
                                           const Taxonomy& taxonomy) const {
  return validate_proposal(proposal, taxonomy, vocabulary(), config_.validation);
}

ValidationReport validate_proposal(const ExpansionProposal& proposal,
                                   const Taxonomy& taxonomy,
                                   const VocabularyConstraint* vocabulary,
                                   const ValidationConfig& config) {
  if (!proposal.proposed_branch || !proposal.replaced_path) {
    throw Error(ErrorCode::invariant_violation,
                "proposal " + proposal.id + " has no parsed branch to validate");
  }
  std::optional<Label> required;
  if (proposal.request.mode == RequestMode::insert_type) required = proposal.request.new_label;
  return validate_branch(*proposal.replaced_path, *proposal.proposed_branch,
                         taxonomy.try_resolve(*proposal.replaced_path), vocabulary, config,
                         required);
}

bool is_current(const ExpansionProposal& proposal, const Taxonomy& taxonomy) {
  if (!proposal.replaced_path) return false;
  if (taxonomy.version() == proposal.request.base_version) return true;
  const TypeNode* node = taxonomy.try_resolve(*proposal.replaced_path);
  return node != nullptr && proposal.base_branch && *node == *proposal.base_branch;
}

ApplyResult apply_proposal(const Taxonomy& taxonomy, ExpansionProposal proposal,
                           Decision decision, bool override_block) {
  if (proposal.status != ProposalStatus::pending) {
    throw Error(ErrorCode::proposal_not_pending,
                "proposal " + proposal.id + " is " + std::string(to_string(proposal.status)));
  }
  if (decision == Decision::reject) {
    proposal.status = ProposalStatus::rejected;
    return {taxonomy, std::move(proposal)};
  }
  if (proposal.validation.verdict == Verdict::blocked && !override_block) {
    throw Error(ErrorCode::blocked_by_validation,
                "proposal " + proposal.id + " is blocked by validation");
  }
  if (!is_current(proposal, taxonomy)) {
    proposal.status = ProposalStatus::superseded;
    throw StaleProposal(std::move(proposal));
  }
  Taxonomy next = taxonomy.replace_branch(*proposal.replaced_path, *proposal.proposed_branch);
  proposal.status = ProposalStatus::accepted;
  return {std::move(next), std::move(proposal)};
}

}  // namespace taxwb
