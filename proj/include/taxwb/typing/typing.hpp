#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "taxwb/core/taxonomy.hpp"
#include "taxwb/llm/backend.hpp"

namespace taxwb::typing {

/// An entity mention: character offsets [start, end) into sentence.
class EntityMention {
 public:
  /// Throws Error(invariant_violation) unless 0 <= start < end <= size.
  EntityMention(std::string sentence, std::size_t start, std::size_t end);

  /// Parses "A:B" offsets.
  static EntityMention from_span(std::string sentence, std::string_view span);

  const std::string& sentence() const noexcept { return sentence_; }
  std::size_t start() const noexcept { return start_; }
  std::size_t end() const noexcept { return end_; }
  std::string_view surface() const noexcept {
    return std::string_view(sentence_).substr(start_, end_ - start_);
  }

 private:
  std::string sentence_;
  std::size_t start_;
  std::size_t end_;
};

struct TypingResult {
  TypePath leaf_path;
  /// Ancestors root-first, then the leaf.
  std::vector<Label> closure;
  std::optional<double> score;
};

/// Root-first labels of the path; throws PathNotFound when unresolvable.
std::vector<Label> closure_labels(const Taxonomy& taxonomy, const TypePath& leaf_path);

TypingResult type_by_closure(const Taxonomy& taxonomy, const TypePath& leaf_path);

enum class StopPolicy { scorer_may_stop, leaf_only };

/// nested: slot k keeps the best unselected extension of the beams held in
/// slots 0..k, so widening the beam never changes what narrower slots hold.
/// top_k: plain top-k over all extensions of all live beams.
enum class BeamSelection { nested, top_k };

std::string_view to_string(StopPolicy policy);
std::string_view to_string(BeamSelection selection);

struct BeamConfig {
  std::size_t beam_width = 3;
  /// Paths never grow past this many segments.
  std::size_t max_depth = 64;
  StopPolicy stop_policy = StopPolicy::scorer_may_stop;
  BeamSelection selection = BeamSelection::nested;
};

struct Candidate {
  Label label;
  TypePath path;
};

struct StepScores {
  std::map<Label, double> children;
  std::optional<double> stop;
};

class NodeScorer {
 public:
  virtual ~NodeScorer() = default;
  virtual StepScores score(const EntityMention& mention, const TypePath& parent,
                           std::span<const Candidate> candidates, bool allow_stop) = 0;
};

/// Throws Error(scorer_contract) unless scores cover exactly the candidates
/// (plus STOP when allowed) with finite values in [0, 1].
void check_scores(const StepScores& scores, std::span<const Candidate> candidates,
                  bool allow_stop);

/// Floor applied to step scores before taking the log.
inline constexpr double kScoreFloor = 1e-9;

double log_step(double score);

/// Terminal beams ranked by score descending, ties by path ascending.
std::vector<TypingResult> type_entity_beamed(const EntityMention& mention,
                                             const Taxonomy& taxonomy,
                                             NodeScorer& scorer,
                                             const BeamConfig& config = {});

/// Scores looked up by candidate full path; STOP looked up by parent path.
class ScriptedScorer : public NodeScorer {
 public:
  ScriptedScorer(std::map<std::string, double> scores, std::map<std::string, double> stop,
                 double default_score = 0.0, double default_stop = 0.0);

  /// {"default": x?, "stop_default": x?, "scores": {path: x}, "stop": {path: x}}
  static ScriptedScorer parse(std::string_view json_text);
  static ScriptedScorer load(const std::filesystem::path& path);

  StepScores score(const EntityMention& mention, const TypePath& parent,
                   std::span<const Candidate> candidates, bool allow_stop) override;

 private:
  std::map<std::string, double> scores_;
  std::map<std::string, double> stop_;
  double default_score_;
  double default_stop_;
};

/// Asks a chat backend for a distribution over the candidates using the
/// choose_type template. Missing labels score 0, unknown keys are ignored and
/// values are clamped to [0, 1].
class LlmScorer : public NodeScorer {
 public:
  LlmScorer(llm::ChatBackend& backend, llm::PromptTemplate tmpl);

  StepScores score(const EntityMention& mention, const TypePath& parent,
                   std::span<const Candidate> candidates, bool allow_stop) override;

  std::string render(const EntityMention& mention, const TypePath& parent,
                     std::span<const Candidate> candidates, bool allow_stop) const;

 private:
  llm::ChatBackend& backend_;
  llm::PromptTemplate template_;
};

inline constexpr std::string_view kStopKey = "STOP";

/// A type in a pattern: a bare label or a full path.
using TypeRef = std::variant<Label, TypePath>;

/// Parses "A / B" as a path and anything without " / " as a bare label.
TypeRef parse_type_ref(std::string_view text);
std::string type_ref_str(const TypeRef& ref);

struct TypePattern {
  TypeRef subject_type;
  std::string relation;
  TypeRef object_type;
};

bool matches_type(const TypeRef& ref, const TypingResult& result);

bool match_pattern(const TypePattern& pattern, const TypingResult& subject,
                   const TypingResult& object, std::string_view relation);

/// One "subject<TAB>relation<TAB>object" per line; blank lines and lines
/// starting with '#' are skipped. Throws Error(parse) with the line number.
std::vector<TypePattern> parse_patterns(std::string_view text);
std::vector<TypePattern> load_patterns(const std::filesystem::path& path);

}  // namespace taxwb::typing
