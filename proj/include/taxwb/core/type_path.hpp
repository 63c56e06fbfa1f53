#pragma once

#include <compare>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxwb/core/label.hpp"

namespace taxwb {

/// Root-to-node label sequence. Never empty.
class TypePath {
 public:
  /// Throws Error(invariant_violation) when segments is empty.
  explicit TypePath(std::vector<Label> segments);
  explicit TypePath(Label root);

  /// Inverse of str(): splits on " / " and validates each segment.
  static TypePath parse(std::string_view full_path_label);

  std::span<const Label> segments() const noexcept { return segments_; }
  std::size_t depth() const noexcept { return segments_.size(); }
  const Label& root() const noexcept { return segments_.front(); }
  const Label& leaf() const noexcept { return segments_.back(); }
  const Label& operator[](std::size_t i) const { return segments_[i]; }

  TypePath child(Label label) const;
  /// Path of the parent; throws invariant_violation on a root path.
  TypePath parent() const;
  /// First n segments, 1 <= n <= depth().
  TypePath prefix(std::size_t n) const;

  /// True when every segment of this path begins other (equal paths included).
  bool is_prefix_of(const TypePath& other) const noexcept;
  /// Case-folded variant of is_prefix_of.
  bool is_prefix_of_folded(const TypePath& other) const;

  /// " / "-joined label, e.g. "Entity / Object / Star".
  std::string str() const;

  friend bool operator==(const TypePath&, const TypePath&) = default;
  friend std::strong_ordering operator<=>(const TypePath& a, const TypePath& b) {
    return std::lexicographical_compare_three_way(
        a.segments_.begin(), a.segments_.end(), b.segments_.begin(),
        b.segments_.end());
  }

 private:
  std::vector<Label> segments_;
};

std::string full_path_label(const TypePath& path);

/// True when neither path is a prefix of the other.
bool disjoint(const TypePath& a, const TypePath& b) noexcept;

inline std::ostream& operator<<(std::ostream& os, const TypePath& path) {
  return os << path.str();
}

}  // namespace taxwb
