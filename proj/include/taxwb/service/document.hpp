#pragma once

// Canonical taxonomy file:
//   {"format_version": 1, "version": N, "metadata": {...}, "root": branch}
// two-space indented, UTF-8, trailing newline. "metadata" is omitted when
// empty.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "taxwb/core/taxonomy.hpp"

namespace taxwb {

inline constexpr int kFormatVersion = 1;

enum class DocumentShape { canonical, bare_branch, label_map };

std::string_view to_string(DocumentShape shape);

struct Document {
  Taxonomy taxonomy;
  /// Free-form object (name, created_at, ...); kept in file order.
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  DocumentShape shape = DocumentShape::canonical;
};

std::string serialize_document(const Taxonomy& taxonomy,
                               const nlohmann::ordered_json& metadata =
                                   nlohmann::ordered_json::object());

/// Accepts the canonical document, a bare branch {"label", "children"}, or a
/// label-keyed map {"Entity": {"Object": {...}, "Time": {}}} whose children
/// keep document order. Non-canonical shapes load at version 1.
/// Throws Error(parse) with line and column for malformed JSON, and
/// schema_violation / sibling_duplicate / invalid_label / empty_label with
/// the JSON pointer of the offending value.
Document parse_document(std::string_view text);

/// The label-keyed map shape alone. A node's value is an object of children,
/// null, an empty array, or an array of leaf label strings.
TypeNode branch_from_label_map(const nlohmann::ordered_json& value);

Document load_document(const std::filesystem::path& path);

/// Writes to a temporary file in the destination directory, then renames it
/// over the destination, so readers never see a partial file. Throws
/// Error(io).
void save_document(const std::filesystem::path& path, const Taxonomy& taxonomy,
                   const nlohmann::ordered_json& metadata = nlohmann::ordered_json::object());

/// Entity with the seven top-level categories Object, Time, Location,
/// Organization, Event, Action and Subject.
Taxonomy default_seed();

/// Reads a whole file; throws Error(io).
std::string read_text_file(const std::filesystem::path& path);

}  // namespace taxwb
