#include "taxwb/expansion/vocabulary.hpp"

#include <fstream>
#include <sstream>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {

VocabularyConstraint::VocabularyConstraint(const std::vector<std::string>& labels,
                                           bool enabled)
    : enabled_(enabled) {
  for (const auto& label : labels) {
    auto normalized = text::normalize_label(label);
    if (!normalized.empty()) allowed_.insert(std::move(normalized));
  }
}

VocabularyConstraint VocabularyConstraint::parse(std::string_view text) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    labels.emplace_back(line);
  }
  return VocabularyConstraint(labels, true);
}

VocabularyConstraint VocabularyConstraint::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read vocabulary file '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool VocabularyConstraint::contains(std::string_view label) const {
  return allowed_.contains(text::normalize_label(label));
}

}  // namespace taxwb
