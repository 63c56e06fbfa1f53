#include "taxwb/llm/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb::llm {
namespace {

bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

// Calls on_text for literal runs and on_slot for each {name}.
template <typename Text, typename Slot>
void scan(std::string_view text, Text on_text, Slot on_slot) {
  std::size_t literal_start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_placeholder_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        on_text(text.substr(literal_start, i - literal_start));
        on_slot(text.substr(i + 1, j - i - 1));
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(text.substr(literal_start));
}

std::string instructions_or_default(std::string_view instructions) {
  const auto trimmed = text::trim(instructions);
  return trimmed.empty() ? std::string(kDefaultInstructions) : std::string(trimmed);
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)) {}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  scan(
      text_, [](std::string_view) {},
      [&](std::string_view slot) {
        if (std::find(out.begin(), out.end(), slot) == out.end()) out.emplace_back(slot);
      });
  return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& context) const {
  std::string out;
  out.reserve(text_.size());
  scan(
      text_, [&](std::string_view literal) { out.append(literal); },
      [&](std::string_view slot) {
        const auto it = context.find(std::string(slot));
        if (it == context.end()) {
          throw Error(ErrorCode::template_placeholder_missing,
                      "template '" + name_ + "' uses {" + std::string(slot) +
                          "} which the rendering context does not provide");
        }
        out.append(it->second);
      });
  return out;
}

TemplateLibrary TemplateLibrary::load_directory(const std::filesystem::path& dir) {
  TemplateLibrary library;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    library.add(PromptTemplate(entry.path().stem().string(), ss.str()));
  }
  if (ec) {
    throw Error(ErrorCode::io, "cannot read template directory " + dir.string() +
                                   ": " + ec.message());
  }
  return library;
}

const TemplateLibrary& TemplateLibrary::builtin() {
  static const TemplateLibrary library = load_directory(TAXWB_DEFAULT_TEMPLATE_DIR);
  return library;
}

void TemplateLibrary::add(PromptTemplate tmpl) {
  const std::string name = tmpl.name();
  templates_.insert_or_assign(name, std::move(tmpl));
}

bool TemplateLibrary::contains(std::string_view name) const {
  return templates_.find(name) != templates_.end();
}

const PromptTemplate& TemplateLibrary::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::template_placeholder_missing,
                "no template named '" + std::string(name) + "'");
  }
  return it->second;
}

std::string render_grounding(std::span<const GroundingDocument> grounding) {
  if (grounding.empty()) return {};
  std::string out = "GROUNDING:\n";
  for (const auto& doc : grounding) {
    out += "[" + doc.name + "]\n";
    out += doc.text;
    if (doc.text.empty() || doc.text.back() != '\n') out += '\n';
  }
  return out;
}

std::string render_expand_prompt(const PromptTemplate& tmpl, const TypeNode& subtree,
                                 const TypePath& target_path,
                                 std::string_view instructions,
                                 std::span<const GroundingDocument> grounding) {
  return tmpl.render({
      {"subtree_json", canonical_branch_text(subtree)},
      {"target_path", full_path_label(target_path)},
      {"instructions", instructions_or_default(instructions)},
      {"grounding", render_grounding(grounding)},
  });
}

std::string render_insert_prompt(const PromptTemplate& tmpl, const TypeNode& context,
                                 const Label& new_type, std::string_view instructions) {
  return tmpl.render({
      {"subtree_json", canonical_branch_text(context)},
      {"new_type", new_type.str()},
      {"instructions", instructions_or_default(instructions)},
      {"grounding", ""},
  });
}

}  // namespace taxwb::llm
