#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taxwb {

enum class ErrorCode {
  invalid_label,
  path_not_found,
  duplicate_sibling,
  root_label_mismatch,
  invariant_violation,
  budget_too_small,
  template_placeholder_missing,
  fixture_miss,
  network,
  http_status,
  timeout,
  no_json_found,
  schema_violation,
  root_mismatch,
  sibling_duplicate,
  empty_label,
  placement_unresolvable,
  stale_proposal,
  blocked_by_validation,
  proposal_not_pending,
  unknown_proposal,
  unknown_rule,
  version_conflict,
  malformed_template,
  unresolvable_anchor,
  label_collision,
  scorer_contract,
  io,
  parse,
};

/// Stable kebab-case name, used in CLI messages, API error bodies and logs.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace taxwb
