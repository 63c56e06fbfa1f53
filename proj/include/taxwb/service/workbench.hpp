#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "taxwb/combination/combination.hpp"
#include "taxwb/expansion/engine.hpp"
#include "taxwb/expansion/session.hpp"
#include "taxwb/typing/typing.hpp"

namespace taxwb {

/// Thrown when an If-Match version is unknown or the subtree a mutation
/// touches changed after that version.
class VersionConflict : public Error {
 public:
  VersionConflict(std::uint64_t expected, std::uint64_t current, const std::string& detail);
  std::uint64_t expected() const noexcept { return expected_; }
  std::uint64_t current() const noexcept { return current_; }

 private:
  std::uint64_t expected_;
  std::uint64_t current_;
};

struct WorkbenchOptions {
  llm::TemplateLibrary templates = llm::TemplateLibrary::builtin();
  EngineConfig engine;
  std::optional<VocabularyConstraint> vocabulary;
  std::vector<CombinationRule> rules;
  RepetitionConfig repetition;
  /// Scorer for typing requests; null means an LLM scorer over the backend.
  std::shared_ptr<typing::NodeScorer> scorer;
  /// Where accepted mutations are saved; none keeps state in memory only.
  std::optional<std::filesystem::path> save_path;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  /// Append-only JSON-lines session log.
  std::optional<std::filesystem::path> log_path;
  ExpansionEngine::Clock clock = utc_timestamp;
};

struct DecisionOutcome {
  ExpansionProposal proposal;
  std::uint64_t version;
};

struct MaterializeOutcome {
  VirtualBranch branch;
  std::uint64_t version;
};

/// Shared state behind the CLI server and the HTTP API: one taxonomy, the
/// proposals made against it, and every committed version (structure
/// shared, so old versions are cheap). Reads take a shared lock; commits
/// take the exclusive lock. Proposal generation calls the backend without
/// holding any lock.
class Workbench {
 public:
  Workbench(Taxonomy taxonomy, std::shared_ptr<llm::ChatBackend> backend,
            WorkbenchOptions options = {});

  Taxonomy snapshot() const;
  std::uint64_t version() const;
  std::string canonical_text() const;

  /// Taxonomy as committed at version; nullopt for unknown versions.
  std::optional<Taxonomy> at_version(std::uint64_t version) const;

  /// Throws VersionConflict when if_match names an unknown version or the
  /// subtree at path differs between that version and the current one.
  void check_subtree_unchanged(std::optional<std::uint64_t> if_match, const TypePath& path) const;

  /// Generates and stores a proposal. With if_match the request's base
  /// version is if_match and the target subtree must be unchanged since
  /// then.
  ExpansionProposal propose(ExpansionRequest request,
                            std::optional<std::uint64_t> if_match = std::nullopt);

  std::vector<ExpansionProposal> proposals() const;
  /// Throws Error(unknown_proposal).
  ExpansionProposal proposal(const std::string& id) const;

  /// Throws unknown_proposal, proposal_not_pending, blocked_by_validation,
  /// StaleProposal (the stored proposal becomes superseded) or
  /// VersionConflict.
  DecisionOutcome decide(const std::string& id, Decision decision,
                         std::optional<std::uint64_t> if_match = std::nullopt,
                         bool override_block = false);

  VirtualBranch expand_combination(const std::string& rule_name) const;
  MaterializeOutcome materialize_combination(const std::string& rule_name,
                                             const TypePath& parent,
                                             std::optional<std::uint64_t> if_match =
                                                 std::nullopt);

  RepetitionReport repetition() const;

  std::vector<typing::TypingResult> type(const typing::EntityMention& mention,
                                         const typing::BeamConfig& config) const;

  const std::vector<CombinationRule>& rules() const noexcept { return options_.rules; }
  std::vector<nlohmann::ordered_json> log_events() const;

 private:
  const CombinationRule& rule(const std::string& name) const;
  void check_locked(std::optional<std::uint64_t> if_match, const TypePath& path) const;
  void commit_locked(Taxonomy next);
  void log(std::string_view event, nlohmann::ordered_json payload);

  std::shared_ptr<llm::ChatBackend> backend_;
  WorkbenchOptions options_;
  ExpansionEngine engine_;
  std::shared_ptr<typing::NodeScorer> scorer_;

  mutable std::shared_mutex mutex_;
  Taxonomy current_;
  std::map<std::uint64_t, Taxonomy> history_;
  std::map<std::string, ExpansionProposal> proposals_;

  mutable std::mutex log_mutex_;
  std::ofstream log_file_;
  std::unique_ptr<SessionLog> log_;
};

}  // namespace taxwb
