#include "taxwb/service/workbench.hpp"

#include "taxwb/core/error.hpp"
#include "taxwb/service/document.hpp"

namespace taxwb {

VersionConflict::VersionConflict(std::uint64_t expected, std::uint64_t current,
                                 const std::string& detail)
    : Error(ErrorCode::version_conflict,
            "If-Match version " + std::to_string(expected) + " conflicts with version " +
                std::to_string(current) + ": " + detail),
      expected_(expected),
      current_(current) {}

Workbench::Workbench(Taxonomy taxonomy, std::shared_ptr<llm::ChatBackend> backend,
                     WorkbenchOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      engine_(*backend_, options_.templates, options_.engine, options_.vocabulary,
              options_.clock),
      scorer_(options_.scorer),
      current_(std::move(taxonomy)) {
  if (!scorer_) {
    scorer_ = std::make_shared<typing::LlmScorer>(
        *backend_, options_.templates.get(llm::kChooseTemplate));
  }
  history_.emplace(current_.version(), current_);
  if (options_.log_path) {
    log_file_.open(*options_.log_path, std::ios::app | std::ios::binary);
    if (!log_file_) {
      throw Error(ErrorCode::io, "cannot open session log '" + options_.log_path->string() + "'");
    }
    log_ = std::make_unique<SessionLog>(&log_file_);
  } else {
    log_ = std::make_unique<SessionLog>();
  }
}

Taxonomy Workbench::snapshot() const {
  std::shared_lock lock(mutex_);
  return current_;
}

std::uint64_t Workbench::version() const {
  std::shared_lock lock(mutex_);
  return current_.version();
}

std::string Workbench::canonical_text() const {
  return serialize_document(snapshot(), options_.metadata);
}

std::optional<Taxonomy> Workbench::at_version(std::uint64_t version) const {
  std::shared_lock lock(mutex_);
  const auto it = history_.find(version);
  if (it == history_.end()) return std::nullopt;
  return it->second;
}

void Workbench::check_locked(std::optional<std::uint64_t> if_match, const TypePath& path) const {
  if (!if_match || *if_match == current_.version()) return;
  const auto it = history_.find(*if_match);
  if (it == history_.end()) {
    throw VersionConflict(*if_match, current_.version(), "unknown version");
  }
  const TypeNode* then = it->second.try_resolve(path);
  const TypeNode* now = current_.try_resolve(path);
  if (then == nullptr && now == nullptr) return;
  if (then == nullptr || now == nullptr || !(*then == *now)) {
    throw VersionConflict(*if_match, current_.version(),
                          "subtree '" + path.str() + "' changed");
  }
}

void Workbench::check_subtree_unchanged(std::optional<std::uint64_t> if_match,
                                        const TypePath& path) const {
  std::shared_lock lock(mutex_);
  check_locked(if_match, path);
}

void Workbench::commit_locked(Taxonomy next) {
  if (options_.save_path) save_document(*options_.save_path, next, options_.metadata);
  history_.insert_or_assign(next.version(), next);
  current_ = std::move(next);
}

void Workbench::log(std::string_view event, nlohmann::ordered_json payload) {
  std::lock_guard lock(log_mutex_);
  log_->append(event, std::move(payload));
}

std::vector<nlohmann::ordered_json> Workbench::log_events() const {
  std::lock_guard lock(log_mutex_);
  return log_->events();
}

ExpansionProposal Workbench::propose(ExpansionRequest request,
                                     std::optional<std::uint64_t> if_match) {
  Taxonomy base = [&] {
    std::shared_lock lock(mutex_);
    if (if_match) {
      if (request.mode == RequestMode::expand_subtree && request.target_path) {
        check_locked(if_match, *request.target_path);
      } else if (!history_.contains(*if_match)) {
        throw VersionConflict(*if_match, current_.version(), "unknown version");
      }
    }
    return current_;
  }();
  request.base_version = if_match.value_or(base.version());
  log("request", {{"request", request_to_json(request)}});

  ExpansionProposal proposal = engine_.propose(base, request);
  {
    std::unique_lock lock(mutex_);
    proposals_.insert_or_assign(proposal.id, proposal);
  }
  log("proposal", {{"proposal", proposal_to_json(proposal)}});
  return proposal;
}

std::vector<ExpansionProposal> Workbench::proposals() const {
  std::shared_lock lock(mutex_);
  std::vector<ExpansionProposal> out;
  out.reserve(proposals_.size());
  for (const auto& [_, p] : proposals_) out.push_back(p);
  return out;
}

ExpansionProposal Workbench::proposal(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = proposals_.find(id);
  if (it == proposals_.end()) throw Error(ErrorCode::unknown_proposal, "no proposal '" + id + "'");
  return it->second;
}

DecisionOutcome Workbench::decide(const std::string& id, Decision decision,
                                  std::optional<std::uint64_t> if_match, bool override_block) {
  std::unique_lock lock(mutex_);
  const auto it = proposals_.find(id);
  if (it == proposals_.end()) throw Error(ErrorCode::unknown_proposal, "no proposal '" + id + "'");
  ExpansionProposal& stored = it->second;
  // A stale proposal is reported as superseded by apply_proposal; the
  // If-Match check only guards proposals that are still current.
  if (stored.status == ProposalStatus::pending && decision == Decision::accept &&
      stored.replaced_path && is_current(stored, current_)) {
    check_locked(if_match, *stored.replaced_path);
  }
  try {
    ApplyResult result = apply_proposal(current_, stored, decision, override_block);
    if (result.taxonomy.version() != current_.version()) commit_locked(result.taxonomy);
    stored = result.proposal;
  } catch (const StaleProposal& e) {
    stored = e.proposal();
    lock.unlock();
    log("decision", {{"id", id}, {"decision", to_string(decision)}, {"status", "superseded"}});
    throw;
  }
  DecisionOutcome outcome{stored, current_.version()};
  lock.unlock();
  log("decision", {{"id", id},
                   {"decision", to_string(decision)},
                   {"status", to_string(outcome.proposal.status)},
                   {"version", outcome.version}});
  return outcome;
}

const CombinationRule& Workbench::rule(const std::string& name) const {
  for (const auto& r : options_.rules) {
    if (r.name == name) return r;
  }
  throw Error(ErrorCode::unknown_rule, "no combination rule named '" + name + "'");
}

VirtualBranch Workbench::expand_combination(const std::string& rule_name) const {
  const CombinationRule& r = rule(rule_name);
  return expand_rule(snapshot(), r);
}

MaterializeOutcome Workbench::materialize_combination(const std::string& rule_name,
                                                      const TypePath& parent,
                                                      std::optional<std::uint64_t> if_match) {
  const CombinationRule& r = rule(rule_name);
  std::unique_lock lock(mutex_);
  check_locked(if_match, parent);
  VirtualBranch branch = expand_rule(current_, r);
  commit_locked(materialize(current_, branch, parent));
  MaterializeOutcome outcome{std::move(branch), current_.version()};
  lock.unlock();
  log("materialize", {{"rule", rule_name}, {"parent", parent.str()}, {"version", outcome.version}});
  return outcome;
}

RepetitionReport Workbench::repetition() const {
  return detect_repetition(snapshot(), options_.repetition);
}

std::vector<typing::TypingResult> Workbench::type(const typing::EntityMention& mention,
                                                  const typing::BeamConfig& config) const {
  return typing::type_entity_beamed(mention, snapshot(), *scorer_, config);
}

}  // namespace taxwb
