#include "taxwb/core/type_path.hpp"

#include <algorithm>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {

TypePath::TypePath(std::vector<Label> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw Error(ErrorCode::invariant_violation, "type path must not be empty");
  }
}

TypePath::TypePath(Label root) { segments_.push_back(std::move(root)); }

TypePath TypePath::parse(std::string_view full_path_label) {
  std::vector<Label> segments;
  std::size_t start = 0;
  while (true) {
    const auto pos = full_path_label.find(kPathSeparator, start);
    if (pos == std::string_view::npos) {
      segments.emplace_back(full_path_label.substr(start));
      break;
    }
    segments.emplace_back(full_path_label.substr(start, pos - start));
    start = pos + kPathSeparator.size();
  }
  return TypePath(std::move(segments));
}

TypePath TypePath::child(Label label) const {
  auto segments = segments_;
  segments.push_back(std::move(label));
  return TypePath(std::move(segments));
}

TypePath TypePath::parent() const {
  if (segments_.size() < 2) {
    throw Error(ErrorCode::invariant_violation, "root path has no parent");
  }
  return prefix(segments_.size() - 1);
}

TypePath TypePath::prefix(std::size_t n) const {
  if (n == 0 || n > segments_.size()) {
    throw Error(ErrorCode::invariant_violation, "prefix length out of range");
  }
  return TypePath(std::vector<Label>(segments_.begin(), segments_.begin() + n));
}

bool TypePath::is_prefix_of(const TypePath& other) const noexcept {
  return segments_.size() <= other.segments_.size() &&
         std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

bool TypePath::is_prefix_of_folded(const TypePath& other) const {
  if (segments_.size() > other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!text::equals_folded(segments_[i].str(), other.segments_[i].str())) {
      return false;
    }
  }
  return true;
}

std::string TypePath::str() const {
  std::string out = segments_.front().str();
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    out += kPathSeparator;
    out += segments_[i].str();
  }
  return out;
}

std::string full_path_label(const TypePath& path) { return path.str(); }

bool disjoint(const TypePath& a, const TypePath& b) noexcept {
  return !a.is_prefix_of(b) && !b.is_prefix_of(a);
}

}  // namespace taxwb
