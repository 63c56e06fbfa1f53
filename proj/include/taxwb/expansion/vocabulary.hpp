#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace taxwb {

/// Closed set of permitted labels, compared after text::normalize_label.
class VocabularyConstraint {
 public:
  VocabularyConstraint() = default;
  explicit VocabularyConstraint(const std::vector<std::string>& labels, bool enabled = true);

  /// One label per line; blank lines and lines starting with '#' are skipped.
  static VocabularyConstraint parse(std::string_view text);
  /// Throws Error(io) when the file cannot be read.
  static VocabularyConstraint load(const std::filesystem::path& file);

  bool enabled() const noexcept { return enabled_; }
  void set_enabled(bool enabled) noexcept { enabled_ = enabled; }
  std::size_t size() const noexcept { return allowed_.size(); }

  bool contains(std::string_view label) const;

 private:
  std::unordered_set<std::string> allowed_;
  bool enabled_ = false;
};

}  // namespace taxwb
