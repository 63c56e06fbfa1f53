#include "taxwb/core/taxonomy.hpp"

#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "taxwb/core/text.hpp"

namespace taxwb {
namespace {

std::string describe_prefix(const std::vector<Label>& prefix) {
  if (prefix.empty()) return "(none)";
  return TypePath(prefix).str();
}

// Rebuilds the spine from node down to the end of rest, applying edit at the
// target; untouched siblings are shared with the original tree.
TypeNode rebuild(const TypeNode& node, std::span<const Label> rest,
                 const std::function<TypeNode(const TypeNode&)>& edit) {
  if (rest.empty()) return edit(node);
  std::vector<TypeNode> children(node.children().begin(), node.children().end());
  for (auto& child : children) {
    if (child.label() == rest.front()) {
      child = rebuild(child, rest.subspan(1), edit);
      return node.with_children(std::move(children));
    }
  }
  // Callers resolve the path first.
  throw Error(ErrorCode::invariant_violation, "rebuild on unresolved path");
}

void collect_paths(const TypeNode& node, std::vector<Label>& stack,
                   const std::function<bool(const Label&)>& match,
                   std::vector<TypePath>& out) {
  stack.push_back(node.label());
  if (match(node.label())) out.emplace_back(stack);
  for (const auto& child : node.children()) collect_paths(child, stack, match, out);
  stack.pop_back();
}

}  // namespace

PathNotFound::PathNotFound(const TypePath& requested, std::vector<Label> resolved_prefix)
    : Error(ErrorCode::path_not_found,
            "'" + requested.str() + "' does not resolve; longest resolvable prefix: " +
                describe_prefix(resolved_prefix)),
      prefix_(std::move(resolved_prefix)) {}

Taxonomy::Taxonomy(TypeNode root, std::uint64_t version)
    : root_(std::move(root)), version_(version) {}

const TypeNode* Taxonomy::try_resolve(const TypePath& path) const noexcept {
  if (path.root() != root_.label()) return nullptr;
  const TypeNode* node = &root_;
  for (std::size_t i = 1; i < path.depth() && node != nullptr; ++i) {
    node = node->find_child(path[i]);
  }
  return node;
}

const TypeNode& Taxonomy::resolve(const TypePath& path) const {
  std::vector<Label> prefix;
  if (path.root() != root_.label()) throw PathNotFound(path, prefix);
  const TypeNode* node = &root_;
  prefix.push_back(root_.label());
  for (std::size_t i = 1; i < path.depth(); ++i) {
    const TypeNode* next = node->find_child(path[i]);
    if (next == nullptr) throw PathNotFound(path, std::move(prefix));
    prefix.push_back(next->label());
    node = next;
  }
  return *node;
}

std::vector<Label> Taxonomy::ancestors(const TypePath& path) const {
  resolve(path);
  const auto segments = path.segments();
  return {segments.begin(), segments.end() - 1};
}

std::vector<TypePath> Taxonomy::find_paths(const Label& label,
                                           bool case_sensitive) const {
  std::vector<TypePath> out;
  std::vector<Label> stack;
  if (case_sensitive) {
    collect_paths(root_, stack, [&](const Label& l) { return l == label; }, out);
  } else {
    const std::string wanted = text::fold_case(label.str());
    collect_paths(root_, stack,
                  [&](const Label& l) { return text::fold_case(l.str()) == wanted; },
                  out);
  }
  return out;
}

Taxonomy Taxonomy::insert_child(const TypePath& parent, Label label) const {
  return insert_branch(parent, TypeNode(std::move(label)));
}

Taxonomy Taxonomy::insert_branch(const TypePath& parent, TypeNode branch) const {
  const TypeNode& target = resolve(parent);
  if (target.find_child(branch.label()) != nullptr) {
    throw Error(ErrorCode::duplicate_sibling, "'" + branch.label().str() +
                                                  "' already exists under '" +
                                                  parent.str() + "'");
  }
  TypeNode root = rebuild(root_, parent.segments().subspan(1),
                          [&](const TypeNode& node) {
                            return node.with_appended_child(branch);
                          });
  return Taxonomy(std::move(root), version_ + 1);
}

Taxonomy Taxonomy::replace_branch(const TypePath& path, TypeNode replacement) const {
  resolve(path);
  if (replacement.label() != path.leaf()) {
    throw Error(ErrorCode::root_label_mismatch,
                "replacement is labeled '" + replacement.label().str() +
                    "' but the branch at '" + path.str() + "' is '" +
                    path.leaf().str() + "'");
  }
  TypeNode root = rebuild(root_, path.segments().subspan(1),
                          [&](const TypeNode&) { return replacement; });
  return Taxonomy(std::move(root), version_ + 1);
}

Taxonomy Taxonomy::with_version(std::uint64_t version) const {
  return Taxonomy(root_, version);
}

Taxonomy create_taxonomy(std::string_view root_label) {
  return Taxonomy(TypeNode(Label(root_label)), 1);
}

TaxonomyStats compute_stats(const Taxonomy& taxonomy) {
  TaxonomyStats stats;
  // Distinct paths are distinct nodes, so occurrences per folded label count
  // distinct paths directly.
  std::unordered_map<std::string, std::size_t> occurrences;
  std::function<void(const TypeNode&, std::size_t)> visit =
      [&](const TypeNode& node, std::size_t depth) {
        ++stats.node_count;
        ++stats.per_depth_counts[depth];
        stats.max_depth = std::max(stats.max_depth, depth);
        if (node.is_leaf()) ++stats.leaf_count;
        ++occurrences[text::fold_case(node.label().str())];
        for (const auto& child : node.children()) visit(child, depth + 1);
      };
  visit(taxonomy.root(), 1);
  for (const auto& [label, count] : occurrences) {
    if (count >= 2) ++stats.duplicate_label_count;
  }
  return stats;
}

TypeNode extract_context_subset(const Taxonomy& taxonomy, const TypePath& focus,
                                std::size_t node_budget) {
  const TypeNode& focus_node = taxonomy.resolve(focus);
  if (node_budget < focus.depth()) {
    throw Error(ErrorCode::budget_too_small,
                "budget " + std::to_string(node_budget) + " cannot hold the " +
                    std::to_string(focus.depth()) + "-node ancestor chain of '" +
                    focus.str() + "'");
  }

  std::unordered_set<const TypeNode*> selected;
  auto take = [&](const TypeNode* node) {
    if (selected.size() >= node_budget) return false;
    selected.insert(node);
    return true;
  };

  std::vector<const TypeNode*> chain;
  chain.push_back(&taxonomy.root());
  for (std::size_t i = 1; i < focus.depth(); ++i) {
    chain.push_back(chain.back()->find_child(focus[i]));
  }
  for (const auto* node : chain) take(node);

  std::deque<const TypeNode*> queue{&focus_node};
  while (!queue.empty() && selected.size() < node_budget) {
    const TypeNode* node = queue.front();
    queue.pop_front();
    for (const auto& child : node->children()) {
      if (!take(&child)) break;
      queue.push_back(&child);
    }
  }

  for (std::size_t level = 0; level + 1 < chain.size(); ++level) {
    for (const auto& sibling : chain[level]->children()) {
      if (&sibling == chain[level + 1]) continue;
      take(&sibling);
    }
  }

  queue.assign(1, &taxonomy.root());
  while (!queue.empty() && selected.size() < node_budget) {
    const TypeNode* node = queue.front();
    queue.pop_front();
    if (!selected.contains(node)) take(node);
    for (const auto& child : node->children()) queue.push_back(&child);
  }

  std::function<TypeNode(const TypeNode&)> copy = [&](const TypeNode& node) {
    std::vector<TypeNode> kept;
    for (const auto& child : node.children()) {
      if (selected.contains(&child)) kept.push_back(copy(child));
    }
    return TypeNode(node.label(), std::move(kept));
  };
  return copy(taxonomy.root());
}

}  // namespace taxwb
