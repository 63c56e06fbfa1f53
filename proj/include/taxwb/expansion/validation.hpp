#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taxwb/core/taxonomy.hpp"
#include "taxwb/expansion/vocabulary.hpp"

namespace taxwb {

enum class DiagnosticKind {
  out_of_vocabulary,
  lexical_overlap_grouping,
  dropped_descendants,
  sibling_duplicate,
  excessive_fanout,
  missing_inserted_label,
};

enum class Severity { info, warn, block };

enum class Verdict { clean, warnings, blocked };

std::string_view to_string(DiagnosticKind kind) noexcept;
std::string_view to_string(Severity severity) noexcept;
std::string_view to_string(Verdict verdict) noexcept;

struct Diagnostic {
  DiagnosticKind kind;
  Severity severity;
  TypePath subject_path;
  std::string detail;
  /// Labels the diagnostic is about: the unknown term, the children sharing a
  /// token with their parent, the dropped label, the near-duplicate pair.
  std::vector<std::string> labels;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;
  Verdict verdict = Verdict::clean;

  static ValidationReport from(std::vector<Diagnostic> diagnostics);
  std::size_t count(DiagnosticKind kind) const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

struct ValidationConfig {
  double overlap_threshold = 0.8;
  std::size_t max_fanout = 50;
  /// Out-of-vocabulary becomes block instead of warn.
  bool closed_vocabulary = false;
};

/// Checks a replacement branch for the path it will replace.
///
/// old_branch is the current node at branch_path (null when there is none).
/// Labels, parents and child sets are "new" relative to old_branch; only new
/// material is checked for vocabulary and lexical overlap. required_label,
/// when set, must appear somewhere in the branch (insert mode).
ValidationReport validate_branch(const TypePath& branch_path, const TypeNode& proposed,
                                 const TypeNode* old_branch,
                                 const VocabularyConstraint* vocabulary,
                                 const ValidationConfig& config,
                                 const std::optional<Label>& required_label = std::nullopt);

/// Fraction of children whose label shares a normalized token with the
/// parent label, ignoring each child's head (final) token.
double lexical_overlap_ratio(const TypeNode& parent);

}  // namespace taxwb
