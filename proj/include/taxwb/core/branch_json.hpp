#pragma once

// Branch interchange schema: {"label": string, "children": [branch, ...]}.
// Used for canonical files, prompts, API bodies and model output.

#include <string>

#include <json.hpp>

#include "taxwb/core/type_node.hpp"

namespace taxwb {

using ordered_json = nlohmann::ordered_json;

ordered_json branch_to_json(const TypeNode& node);

/// Two-space indented, label before children, UTF-8, no trailing newline.
std::string canonical_branch_text(const TypeNode& node);

struct BranchSchemaOptions {
  /// When false a missing "children" key reads as a leaf.
  bool require_children = true;
};

/// Validates and converts. Errors carry the JSON pointer of the offending
/// value in their message: schema_violation for wrong keys or types,
/// empty_label, invalid_label, sibling_duplicate (names the parent path).
TypeNode branch_from_json(const ordered_json& value,
                          BranchSchemaOptions options = {},
                          const std::string& pointer = "");

}  // namespace taxwb
