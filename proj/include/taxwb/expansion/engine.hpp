#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "taxwb/expansion/proposal.hpp"
#include "taxwb/llm/backend.hpp"
#include "taxwb/llm/prompt.hpp"

namespace taxwb {

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

struct EngineConfig {
  /// Node budget for the context subset sent with every prompt.
  std::size_t context_budget = 400;
  int max_output_tokens = 4096;
  double temperature = 0.0;
  ValidationConfig validation;
};

/// Thrown by apply_proposal when the replaced subtree changed after the
/// proposal was made. Carries the proposal with status superseded.
class StaleProposal : public Error {
 public:
  explicit StaleProposal(ExpansionProposal proposal);
  const ExpansionProposal& proposal() const noexcept { return proposal_; }

 private:
  ExpansionProposal proposal_;
};

struct ApplyResult {
  Taxonomy taxonomy;
  ExpansionProposal proposal;
};

/// Turns requests into validated proposals. Holds no taxonomy; safe to call
/// concurrently when the backend is.
class ExpansionEngine {
 public:
  using Clock = std::function<std::string()>;

  ExpansionEngine(llm::ChatBackend& backend, llm::TemplateLibrary templates,
                  EngineConfig config = {},
                  std::optional<VocabularyConstraint> vocabulary = std::nullopt,
                  Clock clock = utc_timestamp);

  const EngineConfig& config() const noexcept { return config_; }
  const VocabularyConstraint* vocabulary() const noexcept {
    return vocabulary_ ? &*vocabulary_ : nullptr;
  }

  /// Backend errors and an unresolvable target propagate; a reply that does
  /// not parse yields a proposal with status failed and the raw text kept.
  ExpansionProposal propose_expansion(const Taxonomy& taxonomy,
                                      const ExpansionRequest& request);
  /// As propose_expansion; an unresolvable placement also yields a failed
  /// proposal (placement_unresolvable).
  ExpansionProposal propose_insertion(const Taxonomy& taxonomy,
                                      const ExpansionRequest& request);
  ExpansionProposal propose(const Taxonomy& taxonomy, const ExpansionRequest& request);

  ValidationReport validate(const ExpansionProposal& proposal,
                            const Taxonomy& taxonomy) const;

 private:
  std::string next_id();
  ExpansionProposal start(const ExpansionRequest& request);
  std::string ask(const std::string& prompt);

  llm::ChatBackend& backend_;
  llm::TemplateLibrary templates_;
  EngineConfig config_;
  std::optional<VocabularyConstraint> vocabulary_;
  Clock clock_;
  std::atomic<std::uint64_t> counter_{0};
};

/// Validation of a parsed proposal against the current content of its
/// replaced path. Pure.
ValidationReport validate_proposal(const ExpansionProposal& proposal,
                                   const Taxonomy& taxonomy,
                                   const VocabularyConstraint* vocabulary,
                                   const ValidationConfig& config);

/// True when the proposal may still be applied to taxonomy: either nothing
/// changed since base_version, or the replaced subtree is content-identical
/// to the snapshot taken at proposal time.
bool is_current(const ExpansionProposal& proposal, const Taxonomy& taxonomy);

/// Accept replaces the branch (version + 1); reject leaves the taxonomy as
/// is. Throws proposal_not_pending, blocked_by_validation (accept of a blocked
/// proposal without override) or StaleProposal.
ApplyResult apply_proposal(const Taxonomy& taxonomy, ExpansionProposal proposal,
                           Decision decision, bool override_block = false);

}  // namespace taxwb
