#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "taxwb/core/error.hpp"
#include "taxwb/core/label.hpp"
#include "taxwb/core/type_node.hpp"
#include "taxwb/core/type_path.hpp"

namespace taxwb {

/// Thrown when a path does not resolve. Carries the longest prefix that did.
class PathNotFound : public Error {
 public:
  PathNotFound(const TypePath& requested, std::vector<Label> resolved_prefix);

  /// Empty when even the root segment did not match.
  const std::vector<Label>& resolved_prefix() const noexcept { return prefix_; }

 private:
  std::vector<Label> prefix_;
};

/// A versioned, immutable taxonomy. Every mutation returns a new value whose
/// version is exactly one greater; the receiver is never modified.
class Taxonomy {
 public:
  explicit Taxonomy(TypeNode root, std::uint64_t version = 1);

  const TypeNode& root() const noexcept { return root_; }
  std::uint64_t version() const noexcept { return version_; }
  TypePath root_path() const { return TypePath(root_.label()); }

  /// Throws PathNotFound.
  const TypeNode& resolve(const TypePath& path) const;
  const TypeNode* try_resolve(const TypePath& path) const noexcept;

  /// Strict ancestors of the node at path, root first. Throws PathNotFound.
  std::vector<Label> ancestors(const TypePath& path) const;

  /// Every path whose final segment matches label, in preorder.
  std::vector<TypePath> find_paths(const Label& label,
                                   bool case_sensitive = false) const;

  Taxonomy insert_child(const TypePath& parent, Label label) const;
  /// Appends a whole subtree under parent. Throws duplicate_sibling.
  Taxonomy insert_branch(const TypePath& parent, TypeNode branch) const;
  /// Replaces the subtree at path wholesale. The replacement must keep the
  /// final label of path (root_label_mismatch otherwise).
  Taxonomy replace_branch(const TypePath& path, TypeNode replacement) const;

  /// Same tree, explicit version; used by loaders.
  Taxonomy with_version(std::uint64_t version) const;

  /// Tree equality, ignoring version.
  bool same_content(const Taxonomy& other) const { return root_ == other.root_; }

 private:
  TypeNode root_;
  std::uint64_t version_;
};

/// Single-node taxonomy at version 1. Throws Error(invalid_label).
Taxonomy create_taxonomy(std::string_view root_label);

struct TaxonomyStats {
  std::size_t node_count = 0;
  std::size_t max_depth = 0;  // root = depth 1
  std::size_t leaf_count = 0;
  /// Labels (case-folded) that occur at two or more distinct paths.
  std::size_t duplicate_label_count = 0;
  std::map<std::size_t, std::size_t> per_depth_counts;
};

TaxonomyStats compute_stats(const Taxonomy& taxonomy);

/// Pruned copy of the taxonomy holding at most node_budget nodes, rooted at
/// the taxonomy root. Nodes are taken in priority order:
///   1. the root-to-focus chain,
///   2. the subtree under focus, breadth first,
///   3. siblings of each chain node, shallowest level first,
///   4. everything else, breadth first over the whole tree,
/// so the result is always connected and has exactly
/// min(node_budget, node_count) nodes. Original child order is kept.
/// Throws PathNotFound, Error(budget_too_small) when node_budget < focus depth.
TypeNode extract_context_subset(const Taxonomy& taxonomy, const TypePath& focus,
                                std::size_t node_budget);

}  // namespace taxwb
