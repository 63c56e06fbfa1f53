#include "taxwb/core/branch_json.hpp"

#include <set>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {
namespace {

std::string where(const std::string& pointer) {
  return pointer.empty() ? "/" : pointer;
}

}  // namespace

ordered_json branch_to_json(const TypeNode& node) {
  ordered_json children = ordered_json::array();
  for (const auto& child : node.children()) children.push_back(branch_to_json(child));
  ordered_json out = ordered_json::object();
  out["label"] = node.label().str();
  out["children"] = std::move(children);
  return out;
}

std::string canonical_branch_text(const TypeNode& node) {
  return branch_to_json(node).dump(2, ' ', false);
}

namespace {

TypeNode parse_branch(const ordered_json& value, const BranchSchemaOptions& options,
                      const std::string& pointer, std::vector<std::string>& trail) {
  if (!value.is_object()) {
    throw Error(ErrorCode::schema_violation,
                "expected a branch object at " + where(pointer));
  }
  for (const auto& [key, _] : value.items()) {
    if (key != "label" && key != "children") {
      throw Error(ErrorCode::schema_violation,
                  "unexpected field '" + key + "' at " + where(pointer));
    }
  }
  const auto label_it = value.find("label");
  if (label_it == value.end() || !label_it->is_string()) {
    throw Error(ErrorCode::schema_violation,
                "missing string field 'label' at " + where(pointer));
  }
  const auto& raw_label = label_it->get_ref<const std::string&>();
  if (text::trim(raw_label).empty()) {
    throw Error(ErrorCode::empty_label, "empty label at " + pointer + "/label");
  }
  Label label = [&] {
    try {
      return Label(raw_label);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at " + pointer + "/label");
    }
  }();

  std::vector<TypeNode> children;
  const auto children_it = value.find("children");
  if (children_it == value.end()) {
    if (options.require_children) {
      throw Error(ErrorCode::schema_violation,
                  "missing array field 'children' at " + where(pointer));
    }
  } else {
    if (!children_it->is_array()) {
      throw Error(ErrorCode::schema_violation,
                  "'children' is not an array at " + pointer + "/children");
    }
    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& child_json : *children_it) {
      const std::string child_pointer =
          pointer + "/children/" + std::to_string(index++);
      trail.push_back(label.str());
      TypeNode child = parse_branch(child_json, options, child_pointer, trail);
      trail.pop_back();
      if (!seen.insert(child.label().str()).second) {
        std::string parent_path;
        for (const auto& segment : trail) parent_path += segment + " / ";
        parent_path += label.str();
        throw Error(ErrorCode::sibling_duplicate,
                    "label '" + child.label().str() + "' occurs twice under '" +
                        parent_path + "' (" + child_pointer + ")");
      }
      children.push_back(std::move(child));
    }
  }
  return TypeNode(std::move(label), std::move(children));
}

}  // namespace

TypeNode branch_from_json(const ordered_json& value, BranchSchemaOptions options,
                          const std::string& pointer) {
  std::vector<std::string> trail;
  return parse_branch(value, options, pointer, trail);
}

}  // namespace taxwb
