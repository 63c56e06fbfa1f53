#include "taxwb/expansion/validation.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "taxwb/core/text.hpp"

namespace taxwb {

std::string_view to_string(DiagnosticKind kind) noexcept {
  switch (kind) {
    case DiagnosticKind::out_of_vocabulary: return "out-of-vocabulary";
    case DiagnosticKind::lexical_overlap_grouping: return "lexical-overlap-grouping";
    case DiagnosticKind::dropped_descendants: return "dropped-descendants";
    case DiagnosticKind::sibling_duplicate: return "sibling-duplicate";
    case DiagnosticKind::excessive_fanout: return "excessive-fanout";
    case DiagnosticKind::missing_inserted_label: return "missing-inserted-label";
  }
  return "unknown";
}

std::string_view to_string(Severity severity) noexcept {
  switch (severity) {
    case Severity::info: return "info";
    case Severity::warn: return "warn";
    case Severity::block: return "block";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::clean: return "clean";
    case Verdict::warnings: return "warnings";
    case Verdict::blocked: return "blocked";
  }
  return "unknown";
}

ValidationReport ValidationReport::from(std::vector<Diagnostic> diagnostics) {
  ValidationReport report;
  report.diagnostics = std::move(diagnostics);
  if (report.diagnostics.empty()) {
    report.verdict = Verdict::clean;
  } else if (std::any_of(report.diagnostics.begin(), report.diagnostics.end(),
                         [](const Diagnostic& d) { return d.severity == Severity::block; })) {
    report.verdict = Verdict::blocked;
  } else {
    report.verdict = Verdict::warnings;
  }
  return report;
}

std::size_t ValidationReport::count(DiagnosticKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(diagnostics.begin(), diagnostics.end(),
                    [&](const Diagnostic& d) { return d.kind == kind; }));
}

namespace {

// Children sharing a token with the parent label, not counting the child's
// head (final) token: "Family_Business" under "Family" shares, "African
// Countries" under "Countries" does not.
std::vector<std::string> sharing_children(const TypeNode& parent) {
  const auto parent_tokens = text::tokenize(parent.label().str());
  const std::unordered_set<std::string> parent_set(parent_tokens.begin(), parent_tokens.end());
  std::vector<std::string> out;
  for (const auto& child : parent.children()) {
    auto tokens = text::tokenize(child.label().str());
    if (!tokens.empty()) tokens.pop_back();
    if (std::any_of(tokens.begin(), tokens.end(),
                    [&](const std::string& t) { return parent_set.contains(t); })) {
      out.push_back(child.label().str());
    }
  }
  return out;
}

struct Visit {
  const TypeNode* node;
  std::vector<Label> full;  // path in the taxonomy
  std::string relative;     // path within the branch
};

std::vector<Visit> preorder(const TypeNode& branch, const TypePath& branch_path) {
  std::vector<Visit> out;
  std::vector<Label> base(branch_path.segments().begin(), branch_path.segments().end() - 1);
  std::function<void(const TypeNode&, std::vector<Label>&, const std::string&)> walk =
      [&](const TypeNode& node, std::vector<Label>& full, const std::string& rel) {
        full.push_back(node.label());
        const std::string here = rel.empty() ? node.label().str() : rel + " / " + node.label().str();
        out.push_back({&node, full, here});
        for (const auto& child : node.children()) walk(child, full, here);
        full.pop_back();
      };
  walk(branch, base, "");
  return out;
}

std::set<std::string> child_labels(const TypeNode& node) {
  std::set<std::string> out;
  for (const auto& child : node.children()) out.insert(child.label().str());
  return out;
}

}  // namespace

double lexical_overlap_ratio(const TypeNode& parent) {
  const auto children = parent.children();
  if (children.empty()) return 0.0;
  return static_cast<double>(sharing_children(parent).size()) /
         static_cast<double>(children.size());
}

ValidationReport validate_branch(const TypePath& branch_path, const TypeNode& proposed,
                                 const TypeNode* old_branch,
                                 const VocabularyConstraint* vocabulary,
                                 const ValidationConfig& config,
                                 const std::optional<Label>& required_label) {
  std::vector<Diagnostic> diagnostics;
  const auto now = preorder(proposed, branch_path);

  std::unordered_set<std::string> old_labels;
  std::map<std::string, std::set<std::string>> old_child_sets;
  std::vector<Visit> before;
  if (old_branch != nullptr) {
    before = preorder(*old_branch, branch_path);
    for (const auto& v : before) {
      old_labels.insert(text::normalize_label(v.node->label().str()));
      old_child_sets.emplace(v.relative, child_labels(*v.node));
    }
  }
  auto is_new_parent = [&](const Visit& v) {
    const auto it = old_child_sets.find(v.relative);
    return it == old_child_sets.end() || it->second != child_labels(*v.node);
  };

  if (vocabulary != nullptr && vocabulary->enabled()) {
    for (const auto& v : now) {
      const auto& label = v.node->label().str();
      if (old_labels.contains(text::normalize_label(label))) continue;
      if (vocabulary->contains(label)) continue;
      diagnostics.push_back({DiagnosticKind::out_of_vocabulary,
                             config.closed_vocabulary ? Severity::block : Severity::warn,
                             TypePath(v.full),
                             "'" + label + "' is not in the permitted vocabulary",
                             {label}});
    }
  }

  for (const auto& v : now) {
    if (v.node->children().size() < 2 || !is_new_parent(v)) continue;
    if (lexical_overlap_ratio(*v.node) + 1e-12 < config.overlap_threshold) continue;
    auto members = sharing_children(*v.node);
    std::string detail = "children of '" + v.node->label().str() +
                         "' are grouped by shared words in their names:";
    for (const auto& m : members) detail += " '" + m + "'";
    diagnostics.push_back({DiagnosticKind::lexical_overlap_grouping, Severity::warn,
                           TypePath(v.full), std::move(detail), std::move(members)});
  }

  if (old_branch != nullptr) {
    std::unordered_set<std::string> new_labels;
    for (const auto& v : now) new_labels.insert(text::normalize_label(v.node->label().str()));
    std::unordered_map<std::string, std::size_t> reported;
    for (const auto& v : before) {
      const auto& label = v.node->label().str();
      const auto key = text::normalize_label(label);
      if (new_labels.contains(key)) continue;
      if (const auto it = reported.find(key); it != reported.end()) {
        auto& labels = diagnostics[it->second].labels;
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
          labels.push_back(label);
        }
        continue;
      }
      reported.emplace(key, diagnostics.size());
      diagnostics.push_back({DiagnosticKind::dropped_descendants, Severity::warn,
                             TypePath(v.full),
                             "'" + label + "' exists in the current branch but not in the "
                             "replacement",
                             {label}});
    }
  }

  for (const auto& v : now) {
    if (v.node->children().size() < 2 || !is_new_parent(v)) continue;
    std::unordered_map<std::string, std::string> first;
    for (const auto& child : v.node->children()) {
      const auto& label = child.label().str();
      auto [it, inserted] = first.emplace(text::normalize_label(label), label);
      if (inserted) continue;
      diagnostics.push_back({DiagnosticKind::sibling_duplicate, Severity::warn,
                             TypePath(v.full),
                             "'" + it->second + "' and '" + label +
                                 "' are the same type under different spellings",
                             {it->second, label}});
    }
  }

  for (const auto& v : now) {
    const auto fanout = v.node->children().size();
    if (fanout <= config.max_fanout || !is_new_parent(v)) continue;
    diagnostics.push_back({DiagnosticKind::excessive_fanout, Severity::warn, TypePath(v.full),
                           "'" + v.node->label().str() + "' has " + std::to_string(fanout) +
                               " children (limit " + std::to_string(config.max_fanout) + ")",
                           {v.node->label().str()}});
  }

  if (required_label) {
    const auto wanted = text::normalize_label(required_label->str());
    const bool present = std::any_of(now.begin(), now.end(), [&](const Visit& v) {
      return text::normalize_label(v.node->label().str()) == wanted;
    });
    if (!present) {
      diagnostics.push_back({DiagnosticKind::missing_inserted_label, Severity::block,
                             branch_path,
                             "the new type '" + required_label->str() +
                                 "' does not occur in the proposed branch",
                             {required_label->str()}});
    }
  }

  return ValidationReport::from(std::move(diagnostics));
}

}  // namespace taxwb
