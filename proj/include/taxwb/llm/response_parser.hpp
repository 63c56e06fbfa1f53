#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "taxwb/core/taxonomy.hpp"

namespace taxwb::llm {

/// First balanced top-level JSON object in free text. Surrounding prose and
/// code fences are ignored; a balanced candidate that fails to parse is
/// skipped in favour of the next one.
std::optional<nlohmann::ordered_json> extract_first_json_object(std::string_view text);

/// Throws Error with code no_json_found, schema_violation, root_mismatch,
/// sibling_duplicate or empty_label. The root comparison ignores case; the
/// returned branch carries expected_root exactly.
TypeNode parse_branch_response(std::string_view text, const Label& expected_root);

struct InsertionResponse {
  /// Path of the parent that receives the new type.
  TypePath placement;
  /// Rewritten branch rooted at the placement node, when the model sent one.
  std::optional<TypeNode> branch;
};

/// Expects {"placement": "A / B" | ["A", "B"], "branch": {...}?}.
InsertionResponse parse_insertion_response(std::string_view text);

}  // namespace taxwb::llm
