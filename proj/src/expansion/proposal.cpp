#include "taxwb/expansion/proposal.hpp"

#include <functional>
#include <unordered_set>

#include "taxwb/core/branch_json.hpp"

namespace taxwb {

std::string_view to_string(RequestMode mode) noexcept {
  return mode == RequestMode::expand_subtree ? "expand-subtree" : "insert-type";
}

std::string_view to_string(ProposalStatus status) noexcept {
  switch (status) {
    case ProposalStatus::pending: return "pending";
    case ProposalStatus::accepted: return "accepted";
    case ProposalStatus::rejected: return "rejected";
    case ProposalStatus::superseded: return "superseded";
    case ProposalStatus::failed: return "failed";
  }
  return "unknown";
}

std::string_view to_string(Decision decision) noexcept {
  return decision == Decision::accept ? "accept" : "reject";
}

ExpansionRequest ExpansionRequest::expand(TypePath target, std::uint64_t base_version,
                                          std::string instructions) {
  ExpansionRequest r;
  r.mode = RequestMode::expand_subtree;
  r.target_path = std::move(target);
  r.base_version = base_version;
  r.instructions = std::move(instructions);
  return r;
}

ExpansionRequest ExpansionRequest::insert(Label new_label, std::uint64_t base_version,
                                          std::string instructions) {
  ExpansionRequest r;
  r.mode = RequestMode::insert_type;
  r.new_label = std::move(new_label);
  r.base_version = base_version;
  r.instructions = std::move(instructions);
  return r;
}

void ExpansionRequest::check() const {
  if (mode == RequestMode::expand_subtree && !target_path) {
    throw Error(ErrorCode::invariant_violation, "expand request without a target path");
  }
  if (mode == RequestMode::insert_type && !new_label) {
    throw Error(ErrorCode::invariant_violation, "insert request without a new label");
  }
}

ordered_json request_to_json(const ExpansionRequest& request) {
  ordered_json out = ordered_json::object();
  out["mode"] = to_string(request.mode);
  if (request.target_path) out["path"] = request.target_path->str();
  if (request.new_label) out["label"] = request.new_label->str();
  out["instructions"] = request.instructions;
  if (!request.grounding.empty()) {
    ordered_json docs = ordered_json::array();
    for (const auto& doc : request.grounding) {
      docs.push_back({{"name", doc.name}, {"text", doc.text}});
    }
    out["grounding"] = std::move(docs);
  }
  out["base_version"] = request.base_version;
  return out;
}

namespace {

[[noreturn]] void bad_request(const std::string& message) {
  throw Error(ErrorCode::schema_violation, message);
}

TypePath path_from_json(const nlohmann::json& value) {
  if (value.is_string()) return TypePath::parse(value.get<std::string>());
  if (value.is_array() && !value.empty()) {
    std::vector<Label> segments;
    for (const auto& segment : value) {
      if (!segment.is_string()) bad_request("path segments must be strings");
      segments.emplace_back(segment.get<std::string>());
    }
    return TypePath(std::move(segments));
  }
  bad_request("'path' must be a path string or a non-empty array of labels");
}

}  // namespace

ExpansionRequest request_from_json(const nlohmann::json& value, std::uint64_t base_version) {
  if (!value.is_object()) bad_request("request must be a JSON object");
  const auto mode_it = value.find("mode");
  if (mode_it == value.end() || !mode_it->is_string()) bad_request("missing string 'mode'");
  const auto mode = mode_it->get<std::string>();

  ExpansionRequest request;
  request.base_version = base_version;
  if (mode == "expand" || mode == "expand-subtree") {
    request.mode = RequestMode::expand_subtree;
    const auto it = value.find("path");
    if (it == value.end()) bad_request("expand request needs 'path'");
    request.target_path = path_from_json(*it);
  } else if (mode == "insert" || mode == "insert-type") {
    request.mode = RequestMode::insert_type;
    const auto it = value.find("label");
    if (it == value.end() || !it->is_string()) bad_request("insert request needs string 'label'");
    request.new_label = Label(it->get<std::string>());
  } else {
    bad_request("unknown mode '" + mode + "'");
  }
  if (const auto it = value.find("instructions"); it != value.end() && !it->is_null()) {
    if (!it->is_string()) bad_request("'instructions' must be a string");
    request.instructions = it->get<std::string>();
  }
  if (const auto it = value.find("grounding"); it != value.end() && !it->is_null()) {
    if (!it->is_array()) bad_request("'grounding' must be an array");
    for (const auto& doc : *it) {
      if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
        bad_request("grounding entries need a string 'text'");
      }
      request.grounding.push_back({doc.value("name", std::string("document")),
                                   doc["text"].get<std::string>()});
    }
  }
  return request;
}

ordered_json report_to_json(const ValidationReport& report) {
  ordered_json diagnostics = ordered_json::array();
  for (const auto& d : report.diagnostics) {
    diagnostics.push_back({{"kind", to_string(d.kind)},
                           {"severity", to_string(d.severity)},
                           {"subject_path", d.subject_path.str()},
                           {"detail", d.detail},
                           {"labels", d.labels}});
  }
  ordered_json out = ordered_json::object();
  out["verdict"] = to_string(report.verdict);
  out["diagnostics"] = std::move(diagnostics);
  return out;
}

ordered_json proposal_to_json(const ExpansionProposal& proposal) {
  ordered_json out = ordered_json::object();
  out["id"] = proposal.id;
  out["status"] = to_string(proposal.status);
  out["request"] = request_to_json(proposal.request);
  out["replaced_path"] =
      proposal.replaced_path ? ordered_json(proposal.replaced_path->str()) : ordered_json();
  if (proposal.placement_path) out["placement_path"] = proposal.placement_path->str();
  out["proposed_branch"] = proposal.proposed_branch
                               ? branch_to_json(*proposal.proposed_branch)
                               : ordered_json();
  out["validation"] = report_to_json(proposal.validation);
  out["raw_response"] = proposal.raw_response;
  out["created_at"] = proposal.created_at;
  if (proposal.error) {
    out["error"] = to_string(*proposal.error);
    out["error_message"] = proposal.error_message;
  }
  return out;
}

namespace {

std::vector<std::string> relative_paths(const TypeNode& root) {
  std::vector<std::string> out;
  std::function<void(const TypeNode&, const std::string&)> walk =
      [&](const TypeNode& node, const std::string& prefix) {
        const std::string here =
            prefix.empty() ? node.label().str() : prefix + " / " + node.label().str();
        out.push_back(here);
        for (const auto& child : node.children()) walk(child, here);
      };
  walk(root, "");
  return out;
}

}  // namespace

BranchDiff diff_branches(const TypeNode* before, const TypeNode& after) {
  BranchDiff diff;
  const auto after_paths = relative_paths(after);
  std::vector<std::string> before_paths;
  if (before != nullptr) before_paths = relative_paths(*before);
  const std::unordered_set<std::string> before_set(before_paths.begin(), before_paths.end());
  const std::unordered_set<std::string> after_set(after_paths.begin(), after_paths.end());
  for (const auto& p : after_paths) {
    (before_set.contains(p) ? diff.retained : diff.added).push_back(p);
  }
  for (const auto& p : before_paths) {
    if (!after_set.contains(p)) diff.removed.push_back(p);
  }
  return diff;
}

ordered_json diff_to_json(const BranchDiff& diff) {
  ordered_json out = ordered_json::object();
  out["added"] = diff.added;
  out["removed"] = diff.removed;
  out["retained"] = diff.retained;
  return out;
}

}  // namespace taxwb
