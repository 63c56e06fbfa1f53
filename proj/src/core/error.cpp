#include "taxwb/core/error.hpp"

namespace taxwb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_label: return "invalid-label";
    case ErrorCode::path_not_found: return "path-not-found";
    case ErrorCode::duplicate_sibling: return "duplicate-sibling";
    case ErrorCode::root_label_mismatch: return "root-label-mismatch";
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::budget_too_small: return "budget-too-small";
    case ErrorCode::template_placeholder_missing: return "template-placeholder-missing";
    case ErrorCode::fixture_miss: return "fixture-miss";
    case ErrorCode::network: return "network";
    case ErrorCode::http_status: return "http-status";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::no_json_found: return "no-json-found";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::root_mismatch: return "root-mismatch";
    case ErrorCode::sibling_duplicate: return "sibling-duplicate";
    case ErrorCode::empty_label: return "empty-label";
    case ErrorCode::placement_unresolvable: return "placement-unresolvable";
    case ErrorCode::stale_proposal: return "stale-proposal";
    case ErrorCode::blocked_by_validation: return "blocked-by-validation";
    case ErrorCode::proposal_not_pending: return "proposal-not-pending";
    case ErrorCode::unknown_proposal: return "unknown-proposal";
    case ErrorCode::unknown_rule: return "unknown-rule";
    case ErrorCode::version_conflict: return "version-conflict";
    case ErrorCode::malformed_template: return "malformed-template";
    case ErrorCode::unresolvable_anchor: return "unresolvable-anchor";
    case ErrorCode::label_collision: return "label-collision";
    case ErrorCode::scorer_contract: return "scorer-contract";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace taxwb
