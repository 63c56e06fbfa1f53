#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taxwb/core/error.hpp"
#include "taxwb/core/taxonomy.hpp"
#include "taxwb/expansion/validation.hpp"
#include "taxwb/llm/prompt.hpp"

namespace taxwb {

enum class RequestMode { expand_subtree, insert_type };

std::string_view to_string(RequestMode mode) noexcept;

struct ExpansionRequest {
  RequestMode mode = RequestMode::expand_subtree;
  std::optional<TypePath> target_path;
  std::optional<Label> new_label;
  std::string instructions;
  std::vector<llm::GroundingDocument> grounding;
  std::uint64_t base_version = 0;

  static ExpansionRequest expand(TypePath target, std::uint64_t base_version,
                                 std::string instructions = {});
  static ExpansionRequest insert(Label new_label, std::uint64_t base_version,
                                 std::string instructions = {});

  /// Throws Error(invariant_violation) when the mode's field is missing.
  void check() const;
};

enum class ProposalStatus { pending, accepted, rejected, superseded, failed };

std::string_view to_string(ProposalStatus status) noexcept;

struct ExpansionProposal {
  std::string id;
  ExpansionRequest request;
  /// Path whose branch the proposal replaces: the target in expand mode, the
  /// placement in insert mode. Unset when placement failed.
  std::optional<TypePath> replaced_path;
  /// Insert mode: the parent the model chose for the new type.
  std::optional<TypePath> placement_path;
  std::optional<TypeNode> proposed_branch;
  /// The node at replaced_path when the proposal was made; staleness is
  /// judged against it.
  std::optional<TypeNode> base_branch;
  std::string raw_response;
  ValidationReport validation;
  ProposalStatus status = ProposalStatus::pending;
  std::string created_at;
  /// Set on failed proposals.
  std::optional<ErrorCode> error;
  std::string error_message;
};

enum class Decision { accept, reject };

std::string_view to_string(Decision decision) noexcept;

using ordered_json = nlohmann::ordered_json;

ordered_json request_to_json(const ExpansionRequest& request);
/// Accepts {"mode": "expand"|"insert", "path"|"label", "instructions"?}.
/// "expand-subtree" and "insert-type" are accepted as mode aliases.
ExpansionRequest request_from_json(const nlohmann::json& value, std::uint64_t base_version);
ordered_json report_to_json(const ValidationReport& report);
ordered_json proposal_to_json(const ExpansionProposal& proposal);

/// Relative paths ("Schools / Primary") of a replacement versus the branch it
/// replaces, each list in preorder.
struct BranchDiff {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  std::vector<std::string> retained;
};

BranchDiff diff_branches(const TypeNode* before, const TypeNode& after);
ordered_json diff_to_json(const BranchDiff& diff);

}  // namespace taxwb
