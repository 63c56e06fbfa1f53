#include "taxwb/llm/response_parser.hpp"

#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb::llm {
namespace {

// End (exclusive) of the balanced object starting at text[open], or npos.
std::size_t balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::ordered_json> extract_first_json_object(std::string_view text) {
  std::size_t pos = text.find('{');
  while (pos != std::string_view::npos) {
    const std::size_t end = balanced_end(text, pos);
    if (end != std::string_view::npos) {
      auto value = nlohmann::ordered_json::parse(text.substr(pos, end - pos), nullptr, false);
      if (!value.is_discarded() && value.is_object()) return value;
    }
    pos = text.find('{', pos + 1);
  }
  return std::nullopt;
}

TypeNode parse_branch_response(std::string_view text, const Label& expected_root) {
  const auto value = extract_first_json_object(text);
  if (!value) throw Error(ErrorCode::no_json_found, "model output contains no JSON object");
  TypeNode branch = branch_from_json(*value, {.require_children = false});
  if (!text::equals_folded(branch.label().str(), expected_root.str())) {
    throw Error(ErrorCode::root_mismatch, "branch root is '" + branch.label().str() +
                                              "' but '" + expected_root.str() +
                                              "' was expected");
  }
  if (branch.label() != expected_root) {
    branch = TypeNode(expected_root, {branch.children().begin(), branch.children().end()});
  }
  return branch;
}

InsertionResponse parse_insertion_response(std::string_view text) {
  const auto value = extract_first_json_object(text);
  if (!value) throw Error(ErrorCode::no_json_found, "model output contains no JSON object");
  for (const auto& [key, _] : value->items()) {
    if (key != "placement" && key != "branch") {
      throw Error(ErrorCode::schema_violation, "unexpected field '" + key + "' at /");
    }
  }
  const auto placement_it = value->find("placement");
  if (placement_it == value->end()) {
    throw Error(ErrorCode::schema_violation, "missing field 'placement' at /");
  }
  std::optional<TypePath> placement;
  try {
    if (placement_it->is_string()) {
      placement = TypePath::parse(placement_it->get<std::string>());
    } else if (placement_it->is_array() && !placement_it->empty()) {
      std::vector<Label> segments;
      for (const auto& segment : *placement_it) {
        if (!segment.is_string()) {
          throw Error(ErrorCode::schema_violation,
                      "placement segments must be strings at /placement");
        }
        segments.emplace_back(segment.get<std::string>());
      }
      placement = TypePath(std::move(segments));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::invalid_label) throw;
    throw Error(ErrorCode::empty_label, "placement has an empty or invalid segment");
  }
  if (!placement) {
    throw Error(ErrorCode::schema_violation,
                "'placement' must be a path string or non-empty array at /placement");
  }
  InsertionResponse response{*placement, std::nullopt};
  if (const auto branch_it = value->find("branch");
      branch_it != value->end() && !branch_it->is_null()) {
    TypeNode branch = branch_from_json(*branch_it, {.require_children = false}, "/branch");
    if (!text::equals_folded(branch.label().str(), response.placement.leaf().str())) {
      throw Error(ErrorCode::root_mismatch,
                  "branch root is '" + branch.label().str() + "' but placement ends at '" +
                      response.placement.leaf().str() + "'");
    }
    if (branch.label() != response.placement.leaf()) {
      branch = TypeNode(response.placement.leaf(),
                        {branch.children().begin(), branch.children().end()});
    }
    response.branch = std::move(branch);
  }
  return response;
}

}  // namespace taxwb::llm
