#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxwb/expansion/engine.hpp"

namespace taxwb {

/// Ordered audit trail: one JSON object per event, {"event": kind, ...}.
class SessionLog {
 public:
  /// When sink is given, every event is also written to it as it happens.
  explicit SessionLog(std::ostream* sink = nullptr) : sink_(sink) {}

  void append(std::string_view event, ordered_json payload);
  const std::vector<ordered_json>& events() const noexcept { return events_; }
  std::string to_jsonl() const;

 private:
  std::vector<ordered_json> events_;
  std::ostream* sink_;
};

struct SessionOptions {
  /// Apply clean and warning proposals; blocked ones are skipped.
  bool auto_accept = true;
};

struct SessionResult {
  Taxonomy taxonomy;
  std::vector<ExpansionProposal> proposals;
};

/// Runs requests in order, each against the taxonomy left by the previous
/// step (base_version is taken from it). Backend errors propagate; failed
/// parses are logged and skipped.
SessionResult run_session(const Taxonomy& taxonomy,
                          std::span<const ExpansionRequest> script,
                          ExpansionEngine& engine, SessionLog& log,
                          SessionOptions options = {});

/// Script file: {"requests": [{"mode": "expand", "path": "A / B",
/// "instructions": "..."}, {"mode": "insert", "label": "X"}, ...]}.
std::vector<ExpansionRequest> parse_session_script(std::string_view json_text);
std::vector<ExpansionRequest> load_session_script(const std::filesystem::path& file);

}  // namespace taxwb
