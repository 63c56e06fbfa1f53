#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taxwb/core/taxonomy.hpp"

namespace taxwb {

/// Template rule over two anchor branches. {left} is replaced by each child
/// of the left anchor, {right} by the right anchor's own label; an alias
/// table maps a label to the surface form used in the substitution
/// ("Australia" -> "Australian").
struct CombinationRule {
  std::string name;
  TypePath left_anchor;
  TypePath right_anchor;
  std::string template_text;
  std::map<std::string, std::string> aliases;
  /// Left-anchor child label -> labels of nodes under the right anchor.
  std::map<std::string, std::vector<std::string>> membership;
};

/// Checks anchors, placeholders, rendered labels and membership. Throws
/// unresolvable_anchor, malformed_template or invalid_label (rule name).
CombinationRule define_rule(const Taxonomy& taxonomy, std::string name, TypePath left_anchor,
                            TypePath right_anchor, std::string template_text,
                            std::map<std::string, std::string> aliases = {},
                            std::map<std::string, std::vector<std::string>> membership = {});

/// Combined categories generated on demand. generated is labeled with the
/// rule name and holds one category per left-anchor child, in child order.
struct VirtualBranch {
  std::string rule_name;
  TypeNode generated;
};

/// Throws unresolvable_anchor (taxonomy changed since definition) or
/// label_collision (two substitutions render the same label).
VirtualBranch expand_rule(const Taxonomy& taxonomy, const CombinationRule& rule);

/// Inserts the generated node under parent; version + 1. Throws
/// path_not_found or duplicate_sibling.
Taxonomy materialize(const Taxonomy& taxonomy, const VirtualBranch& branch,
                     const TypePath& parent);

/// Rules file: {"rules": [{"name", "left", "right", "template",
/// "aliases"?: {label: form}, "membership"?: {label: [label, ...]}}]}.
/// Paths are " / "-joined strings or label arrays.
std::vector<CombinationRule> parse_rules(const nlohmann::json& document,
                                         const Taxonomy& taxonomy);
std::vector<CombinationRule> load_rules(const std::filesystem::path& file,
                                        const Taxonomy& taxonomy);

nlohmann::ordered_json rule_to_json(const CombinationRule& rule);

struct RepetitionConfig {
  /// Minimum number of distinct parents for a duplicated label group.
  std::size_t min_parents = 2;
  double jaccard_threshold = 0.6;
};

struct DuplicatedLabelGroup {
  /// First spelling met in preorder.
  std::string label;
  std::vector<TypePath> paths;
};

struct MirroredSiblingSet {
  TypePath first;
  TypePath second;
  double jaccard = 0.0;
  /// Matched (first child, second child) label pairs.
  std::vector<std::pair<std::string, std::string>> matches;
};

struct RepetitionReport {
  std::vector<DuplicatedLabelGroup> duplicated_label_groups;
  std::vector<MirroredSiblingSet> mirrored_sibling_sets;

  bool empty() const noexcept {
    return duplicated_label_groups.empty() && mirrored_sibling_sets.empty();
  }
};

/// Duplicated labels compare normalized. Sibling sets compare by each
/// child's tokens minus the tokens it shares with its parent's label; two
/// tokens match when equal or when the shorter (at least 4 characters) is a
/// prefix of the other, so "Africa" pairs with "African Countries" under
/// "Countries --- By Continent". Children match when every token on each
/// side matches one on the other; Jaccard = m / (|A| + |B| - m) over a
/// greedy matching.
RepetitionReport detect_repetition(const Taxonomy& taxonomy,
                                   const RepetitionConfig& config = {});

nlohmann::ordered_json repetition_to_json(const RepetitionReport& report);

}  // namespace taxwb
