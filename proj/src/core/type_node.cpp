#include "taxwb/core/type_node.hpp"

#include <set>

#include "taxwb/core/error.hpp"

namespace taxwb {

TypeNode::TypeNode(Label label) : label_(std::move(label)) {}

TypeNode::TypeNode(Label label, std::vector<TypeNode> children)
    : label_(std::move(label)) {
  if (children.empty()) return;
  std::set<std::string_view> seen;
  for (const auto& child : children) {
    if (!seen.insert(child.label().str()).second) {
      throw Error(ErrorCode::duplicate_sibling,
                  "label '" + child.label().str() + "' occurs twice under '" +
                      label_.str() + "'");
    }
  }
  children_ = std::make_shared<const std::vector<TypeNode>>(std::move(children));
}

std::span<const TypeNode> TypeNode::children() const noexcept {
  if (!children_) return {};
  return *children_;
}

const TypeNode* TypeNode::find_child(const Label& label) const noexcept {
  for (const auto& child : children()) {
    if (child.label() == label) return &child;
  }
  return nullptr;
}

std::size_t TypeNode::subtree_size() const {
  std::size_t n = 1;
  for (const auto& child : children()) n += child.subtree_size();
  return n;
}

TypeNode TypeNode::with_children(std::vector<TypeNode> children) const {
  return TypeNode(label_, std::move(children));
}

TypeNode TypeNode::with_appended_child(TypeNode child) const {
  std::vector<TypeNode> children(this->children().begin(), this->children().end());
  children.push_back(std::move(child));
  return with_children(std::move(children));
}

bool operator==(const TypeNode& a, const TypeNode& b) {
  if (a.label_ != b.label_) return false;
  if (a.children_ == b.children_) return true;
  const auto ca = a.children();
  const auto cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!(ca[i] == cb[i])) return false;
  }
  return true;
}

}  // namespace taxwb
