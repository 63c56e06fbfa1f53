#pragma once

// Text normalization shared by every module that compares labels: path
// lookup, duplicate detection, validation diagnostics and repetition reports
// all go through these functions so their notion of "same label" agrees.

#include <string>
#include <string_view>
#include <vector>

namespace taxwb::text {

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

/// Unicode simple case folding, applied per code point. Invalid UTF-8 bytes
/// pass through unchanged.
std::string fold_case(std::string_view s);

bool equals_folded(std::string_view a, std::string_view b);

/// Lowercase, underscores to spaces, trimmed, inner whitespace collapsed.
/// "Family_Business" and " family  business" normalize identically.
std::string normalize_label(std::string_view s);

/// Case-folded tokens split on space, underscore and hyphen. Tokens without
/// any letter or digit (e.g. "---") are dropped.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace taxwb::text
