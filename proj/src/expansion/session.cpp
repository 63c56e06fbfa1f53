#include "taxwb/expansion/session.hpp"

#include <fstream>
#include <sstream>

namespace taxwb {

void SessionLog::append(std::string_view event, ordered_json payload) {
  ordered_json record = ordered_json::object();
  record["event"] = event;
  for (auto& [key, value] : payload.items()) record[key] = std::move(value);
  if (sink_ != nullptr) *sink_ << record.dump() << '\n' << std::flush;
  events_.push_back(std::move(record));
}

std::string SessionLog::to_jsonl() const {
  std::string out;
  for (const auto& event : events_) out += event.dump() + "\n";
  return out;
}

SessionResult run_session(const Taxonomy& taxonomy,
                          std::span<const ExpansionRequest> script,
                          ExpansionEngine& engine, SessionLog& log,
                          SessionOptions options) {
  if (script.empty()) throw Error(ErrorCode::invariant_violation, "session script is empty");
  SessionResult result{taxonomy, {}};
  std::size_t step = 0;
  for (const auto& scripted : script) {
    ++step;
    ExpansionRequest request = scripted;
    request.base_version = result.taxonomy.version();
    log.append("request", {{"step", step}, {"request", request_to_json(request)}});

    ExpansionProposal proposal = engine.propose(result.taxonomy, request);
    log.append("proposal", {{"step", step}, {"proposal", proposal_to_json(proposal)}});

    if (proposal.status == ProposalStatus::failed) {
      log.append("decision", {{"step", step},
                              {"id", proposal.id},
                              {"decision", "skip"},
                              {"reason", to_string(*proposal.error)}});
      result.proposals.push_back(std::move(proposal));
      continue;
    }
    log.append("report", {{"step", step},
                          {"id", proposal.id},
                          {"report", report_to_json(proposal.validation)}});
    if (!options.auto_accept) {
      result.proposals.push_back(std::move(proposal));
      continue;
    }
    if (proposal.validation.verdict == Verdict::blocked) {
      log.append("decision", {{"step", step},
                              {"id", proposal.id},
                              {"decision", "skip"},
                              {"reason", "blocked"}});
      result.proposals.push_back(std::move(proposal));
      continue;
    }
    auto applied = apply_proposal(result.taxonomy, std::move(proposal), Decision::accept);
    result.taxonomy = std::move(applied.taxonomy);
    log.append("decision", {{"step", step},
                            {"id", applied.proposal.id},
                            {"decision", "accept"},
                            {"version", result.taxonomy.version()}});
    result.proposals.push_back(std::move(applied.proposal));
  }
  return result;
}

std::vector<ExpansionRequest> parse_session_script(std::string_view json_text) {
  const auto value = nlohmann::json::parse(json_text, nullptr, false);
  if (value.is_discarded()) throw Error(ErrorCode::parse, "session script is not valid JSON");
  if (!value.is_object() || !value.contains("requests") || !value["requests"].is_array()) {
    throw Error(ErrorCode::schema_violation, "session script needs a 'requests' array");
  }
  std::vector<ExpansionRequest> requests;
  std::size_t index = 0;
  for (const auto& item : value["requests"]) {
    try {
      requests.push_back(request_from_json(item, 0));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at /requests/" + std::to_string(index));
    }
    ++index;
  }
  return requests;
}

std::vector<ExpansionRequest> load_session_script(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read session script '" + file.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_session_script(buffer.str());
}

}  // namespace taxwb
