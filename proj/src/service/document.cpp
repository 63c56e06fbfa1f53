#include "taxwb/service/document.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

/// Object keys seen so far on each open container, for duplicate detection.
struct Frame {
  bool is_object;
  std::set<std::string> keys;
  std::string key;
};

ordered_json parse_json_strict(std::string_view text) {
  struct DuplicateKeySax : nlohmann::json_sax<ordered_json> {
    std::vector<Frame> frames;
    std::string duplicate;
    std::string duplicate_parent;

    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_object(std::size_t) override {
      frames.push_back(Frame{true, {}, {}});
      return true;
    }
    bool key(string_t& k) override {
      auto& frame = frames.back();
      if (!frame.keys.insert(k).second && duplicate.empty()) {
        duplicate = k;
        for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
          if (!frames[i].is_object) continue;
          duplicate_parent += "/" + escape_pointer_token(frames[i].key);
        }
      }
      frame.key = k;
      return true;
    }
    bool end_object() override {
      frames.pop_back();
      return true;
    }
    bool start_array(std::size_t) override {
      frames.push_back(Frame{false, {}, {}});
      return true;
    }
    bool end_array() override {
      frames.pop_back();
      return true;
    }
    bool parse_error(std::size_t, const std::string&,
                     const nlohmann::detail::exception&) override {
      return false;
    }
  };

  ordered_json value;
  try {
    value = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::parse,
                "malformed JSON at " + position_of(text, e.byte == 0 ? 0 : e.byte - 1) +
                    ": " + e.what());
  }
  DuplicateKeySax sax;
  ordered_json::sax_parse(text, &sax);
  if (!sax.duplicate.empty()) {
    throw Error(ErrorCode::sibling_duplicate,
                "key '" + sax.duplicate + "' occurs twice in the object at " +
                    (sax.duplicate_parent.empty() ? "/" : sax.duplicate_parent));
  }
  return value;
}

TypeNode parse_map_node(const std::string& key, const ordered_json& value,
                        const std::string& pointer) {
  if (text::trim(key).empty()) throw Error(ErrorCode::empty_label, "empty label at " + pointer);
  Label label = [&] {
    try {
      return Label(key);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at " + pointer);
    }
  }();
  std::vector<TypeNode> children;
  if (value.is_object()) {
    for (const auto& [child_key, child_value] : value.items()) {
      children.push_back(
          parse_map_node(child_key, child_value, pointer + "/" + escape_pointer_token(child_key)));
    }
  } else if (value.is_array()) {
    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& item : value) {
      const std::string item_pointer = pointer + "/" + std::to_string(index++);
      if (!item.is_string()) {
        throw Error(ErrorCode::schema_violation,
                    "expected a leaf label string at " + item_pointer);
      }
      const auto& leaf = item.get_ref<const std::string&>();
      if (!seen.insert(leaf).second) {
        throw Error(ErrorCode::sibling_duplicate,
                    "label '" + leaf + "' occurs twice at " + pointer);
      }
      children.push_back(parse_map_node(leaf, nullptr, item_pointer));
    }
  } else if (!value.is_null()) {
    throw Error(ErrorCode::schema_violation,
                "expected an object, array or null at " + pointer);
  }
  return TypeNode(std::move(label), std::move(children));
}

std::uint64_t positive_integer(const ordered_json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::schema_violation, std::string("missing field '") + key + "' at /");
  }
  if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0) {
    throw Error(ErrorCode::schema_violation,
                std::string("'") + key + "' must be a positive integer at /" + key);
  }
  return it->get<std::uint64_t>();
}

Document parse_canonical(const ordered_json& doc) {
  for (const auto& [key, _] : doc.items()) {
    if (key != "format_version" && key != "version" && key != "metadata" && key != "root") {
      throw Error(ErrorCode::schema_violation, "unexpected field '" + key + "' at /");
    }
  }
  const auto format = positive_integer(doc, "format_version");
  if (format != static_cast<std::uint64_t>(kFormatVersion)) {
    throw Error(ErrorCode::schema_violation,
                "unsupported format_version " + std::to_string(format) + " at /format_version");
  }
  const auto version = positive_integer(doc, "version");
  ordered_json metadata = ordered_json::object();
  if (const auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) {
      throw Error(ErrorCode::schema_violation, "'metadata' must be an object at /metadata");
    }
    metadata = *it;
  }
  const auto root = doc.find("root");
  if (root == doc.end()) throw Error(ErrorCode::schema_violation, "missing field 'root' at /");
  return Document{Taxonomy(branch_from_json(*root, {}, "/root"), version), std::move(metadata),
                  DocumentShape::canonical};
}

}  // namespace

std::string_view to_string(DocumentShape shape) {
  switch (shape) {
    case DocumentShape::canonical:
      return "canonical";
    case DocumentShape::bare_branch:
      return "bare-branch";
    case DocumentShape::label_map:
      return "label-map";
  }
  return "unknown";
}

std::string serialize_document(const Taxonomy& taxonomy, const ordered_json& metadata) {
  ordered_json doc = ordered_json::object();
  doc["format_version"] = kFormatVersion;
  doc["version"] = taxonomy.version();
  if (metadata.is_object() && !metadata.empty()) doc["metadata"] = metadata;
  doc["root"] = branch_to_json(taxonomy.root());
  return doc.dump(2, ' ', false) + "\n";
}

TypeNode branch_from_label_map(const ordered_json& value) {
  if (!value.is_object() || value.size() != 1) {
    throw Error(ErrorCode::schema_violation,
                "a label map needs exactly one top-level key (the root label) at /");
  }
  const auto it = value.begin();
  return parse_map_node(it.key(), it.value(), "/" + escape_pointer_token(it.key()));
}

Document parse_document(std::string_view text) {
  const ordered_json doc = parse_json_strict(text);
  if (!doc.is_object()) {
    throw Error(ErrorCode::schema_violation, "expected a JSON object at /");
  }
  if (doc.contains("format_version")) return parse_canonical(doc);
  if (const auto it = doc.find("label"); it != doc.end() && it->is_string()) {
    return Document{Taxonomy(branch_from_json(doc, {.require_children = false})),
                    ordered_json::object(), DocumentShape::bare_branch};
  }
  if (doc.size() == 1) {
    return Document{Taxonomy(branch_from_label_map(doc)), ordered_json::object(),
                    DocumentShape::label_map};
  }
  throw Error(ErrorCode::schema_violation,
              "unrecognized document shape at /: expected a canonical document, a branch "
              "object or a single-rooted label map");
}

Taxonomy default_seed() {
  std::vector<TypeNode> children;
  for (const char* label :
       {"Object", "Time", "Location", "Organization", "Event", "Action", "Subject"}) {
    children.emplace_back(Label(label));
  }
  return Taxonomy(TypeNode(Label("Entity"), std::move(children)));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Document load_document(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_document(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_document(const std::filesystem::path& path, const Taxonomy& taxonomy,
                   const ordered_json& metadata) {
  static std::atomic<unsigned> counter{0};
  const std::string bytes = serialize_document(taxonomy, metadata);
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto temp = dir / ("." + path.filename().string() + ".tmp-" +
                           std::to_string(::getpid()) + "-" + std::to_string(counter++));

  auto fail = [&](const std::string& what) {
    const std::string reason = std::strerror(errno);
    std::error_code ignored;
    std::filesystem::remove(temp, ignored);
    throw Error(ErrorCode::io, what + " '" + path.string() + "': " + reason);
  };

  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) fail("cannot write");
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fail("cannot write");
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    fail("cannot sync");
  }
  if (::close(fd) != 0) fail("cannot close");
  if (::rename(temp.c_str(), path.c_str()) != 0) fail("cannot replace");
}

}  // namespace taxwb
