#pragma once

#include <compare>
#include <ostream>
#include <string>
#include <string_view>

namespace taxwb {

/// Separator used by full-path labels ("Entity / Object / Star").
inline constexpr std::string_view kPathSeparator = " / ";

/// A type name. Always trimmed, never empty, never contains kPathSeparator.
class Label {
 public:
  /// Throws Error(invalid_label).
  explicit Label(std::string_view text);

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const Label&, const Label&) = default;
  friend std::strong_ordering operator<=>(const Label&, const Label&) = default;

 private:
  std::string text_;
};

inline std::ostream& operator<<(std::ostream& os, const Label& label) {
  return os << label.str();
}

}  // namespace taxwb
