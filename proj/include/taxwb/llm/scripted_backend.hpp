#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "taxwb/llm/backend.hpp"

namespace taxwb::llm {

struct FixtureRecord {
  enum class Matcher { substring, sha256 };

  Matcher matcher = Matcher::substring;
  /// Substring of the prompt, or lowercase hex SHA-256 of the whole prompt.
  std::string pattern;
  std::string response;

  bool matches(std::string_view prompt) const;
};

/// Canned responses for deterministic runs.
///
/// File format: one JSON object per line; blank lines and lines starting
/// with '#' are skipped.
///   {"match": "<substring>", "response": "<text>"}
///   {"match_sha256": "<hex digest of prompt>", "response": "<text>"}
///   {"strict": false}          (directive; default is strict)
struct ScriptedFixture {
  std::vector<FixtureRecord> records;
  bool strict = true;

  static ScriptedFixture parse(std::string_view jsonl);
  static ScriptedFixture load(const std::filesystem::path& file);
};

std::string sha256_hex(std::string_view data);

/// Each record answers at most one request: a request takes the first
/// unconsumed record whose matcher accepts the prompt. When none is left a
/// strict backend throws Error(fixture_miss); a lenient one reuses the first
/// matching record, or answers with empty text.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(ScriptedFixture fixture, std::string id = "scripted");

  std::string id() const override { return id_; }

  std::size_t consumed_count() const;
  std::vector<std::string> prompts() const;

 protected:
  std::string do_complete(const ChatRequest& request) override;

 private:
  std::string id_;
  ScriptedFixture fixture_;
  mutable std::mutex mutex_;
  std::vector<bool> consumed_;
  std::vector<std::string> prompts_;
};

}  // namespace taxwb::llm
