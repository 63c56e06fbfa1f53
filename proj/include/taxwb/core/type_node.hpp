#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "taxwb/core/label.hpp"

namespace taxwb {

/// Immutable tree node. Children are shared between copies, so copying a
/// node is O(1) and trees built from an existing tree share every subtree
/// they do not touch.
class TypeNode {
 public:
  explicit TypeNode(Label label);
  /// Throws Error(duplicate_sibling) if two children carry the same label.
  TypeNode(Label label, std::vector<TypeNode> children);

  const Label& label() const noexcept { return label_; }
  std::span<const TypeNode> children() const noexcept;
  bool is_leaf() const noexcept { return children().empty(); }

  /// Exact label match among direct children.
  const TypeNode* find_child(const Label& label) const noexcept;

  /// Number of nodes in this subtree, including this node.
  std::size_t subtree_size() const;

  TypeNode with_children(std::vector<TypeNode> children) const;
  TypeNode with_appended_child(TypeNode child) const;

  /// Structural equality. Shared subtrees compare in O(1).
  friend bool operator==(const TypeNode& a, const TypeNode& b);

 private:
  Label label_;
  std::shared_ptr<const std::vector<TypeNode>> children_;
};

}  // namespace taxwb
