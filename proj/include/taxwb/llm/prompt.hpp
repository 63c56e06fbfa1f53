#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxwb/core/taxonomy.hpp"

namespace taxwb::llm {

/// A named text document inlined into a prompt as domain grounding.
struct GroundingDocument {
  std::string name;
  std::string text;
};

/// Plain text with {placeholder} slots. Placeholders are lowercase
/// identifiers in braces; other brace usage (JSON examples) is literal.
class PromptTemplate {
 public:
  PromptTemplate(std::string name, std::string text);

  const std::string& name() const noexcept { return name_; }
  const std::string& text() const noexcept { return text_; }

  /// Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;

  /// Single-pass substitution; substituted values are never re-expanded.
  /// Throws Error(template_placeholder_missing) naming the first placeholder
  /// absent from context.
  std::string render(const std::map<std::string, std::string>& context) const;

 private:
  std::string name_;
  std::string text_;
};

/// Templates loaded by name from "<dir>/<name>.txt".
class TemplateLibrary {
 public:
  static TemplateLibrary load_directory(const std::filesystem::path& dir);
  /// Templates shipped with the project (the templates/ directory).
  static const TemplateLibrary& builtin();

  void add(PromptTemplate tmpl);
  bool contains(std::string_view name) const;
  /// Throws Error(template_placeholder_missing) for an unknown name.
  const PromptTemplate& get(std::string_view name) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

inline constexpr std::string_view kExpandTemplate = "expand_subtree";
inline constexpr std::string_view kInsertTemplate = "insert_type";
inline constexpr std::string_view kChooseTemplate = "choose_type";

/// Text used for {instructions} when the caller supplies none.
inline constexpr std::string_view kDefaultInstructions = "(no additional instructions)";

/// "GROUNDING:" marker line followed by each document, or "" when empty.
std::string render_grounding(std::span<const GroundingDocument> grounding);

std::string render_expand_prompt(const PromptTemplate& tmpl, const TypeNode& subtree,
                                 const TypePath& target_path,
                                 std::string_view instructions,
                                 std::span<const GroundingDocument> grounding = {});

std::string render_insert_prompt(const PromptTemplate& tmpl, const TypeNode& context,
                                 const Label& new_type, std::string_view instructions);

}  // namespace taxwb::llm
