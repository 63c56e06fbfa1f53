#include "taxwb/service/api_server.hpp"

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/text.hpp"
#include "taxwb/service/views.hpp"

namespace taxwb {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(2, ' ', false) + "\n", kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  send(res, http_status_for(e.code()),
       {{"error", to_string(e.code())}, {"message", e.what()}});
}

void set_etag(httplib::Response& res, std::uint64_t version) {
  res.set_header("ETag", "\"" + std::to_string(version) + "\"");
}

template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const StaleProposal& e) {
      send(res, http_status_for(e.code()),
           {{"error", to_string(e.code())},
            {"message", e.what()},
            {"proposal", proposal_to_json(e.proposal())}});
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  };
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto value = json::parse(req.body, nullptr, false);
  if (value.is_discarded()) throw Error(ErrorCode::parse, "request body is not valid JSON");
  if (!value.is_object()) throw Error(ErrorCode::schema_violation, "request body must be an object");
  return value;
}

std::optional<std::uint64_t> if_match(const httplib::Request& req) {
  if (!req.has_header("If-Match")) return std::nullopt;
  return parse_if_match(req.get_header_value("If-Match"));
}

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) {
    throw Error(ErrorCode::schema_violation, std::string("missing query parameter '") + name + "'");
  }
  return req.get_param_value(name);
}

TypePath path_from(const json& value, const char* field) {
  if (value.is_string()) return TypePath::parse(value.get<std::string>());
  if (value.is_array() && !value.empty()) {
    std::vector<Label> segments;
    for (const auto& s : value) {
      if (!s.is_string()) break;
      segments.emplace_back(s.get<std::string>());
    }
    if (segments.size() == value.size()) return TypePath(std::move(segments));
  }
  throw Error(ErrorCode::schema_violation,
              std::string("'") + field + "' must be a path string or label array");
}

typing::EntityMention mention_from(const json& body) {
  const auto sentence = body.find("sentence");
  if (sentence == body.end() || !sentence->is_string()) {
    throw Error(ErrorCode::schema_violation, "missing string 'sentence'");
  }
  const auto span = body.find("span");
  if (span == body.end()) throw Error(ErrorCode::schema_violation, "missing 'span'");
  if (span->is_string()) {
    return typing::EntityMention::from_span(sentence->get<std::string>(), span->get<std::string>());
  }
  if (span->is_array() && span->size() == 2 && (*span)[0].is_number_unsigned() &&
      (*span)[1].is_number_unsigned()) {
    return typing::EntityMention(sentence->get<std::string>(), (*span)[0].get<std::size_t>(),
                                 (*span)[1].get<std::size_t>());
  }
  throw Error(ErrorCode::schema_violation, "'span' must be \"START:END\" or [start, end]");
}

std::size_t positive(const json& body, const char* key, std::size_t fallback) {
  const auto it = body.find(key);
  if (it == body.end()) return fallback;
  if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) {
    throw Error(ErrorCode::schema_violation, std::string("'") + key + "' must be a positive integer");
  }
  return it->get<std::size_t>();
}

}  // namespace

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::path_not_found:
    case ErrorCode::unknown_proposal:
    case ErrorCode::unknown_rule:
      return 404;
    case ErrorCode::stale_proposal:
    case ErrorCode::proposal_not_pending:
    case ErrorCode::blocked_by_validation:
    case ErrorCode::version_conflict:
    case ErrorCode::label_collision:
    case ErrorCode::duplicate_sibling:
      return 409;
    case ErrorCode::fixture_miss:
    case ErrorCode::network:
    case ErrorCode::http_status:
    case ErrorCode::timeout:
    case ErrorCode::no_json_found:
      return 502;
    case ErrorCode::io:
      return 500;
    default:
      return 400;
  }
}

std::uint64_t parse_if_match(std::string_view header) {
  std::string_view s = text::trim(header);
  if (s.starts_with("W/")) s.remove_prefix(2);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  std::uint64_t version = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), version);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse, "If-Match '" + std::string(header) + "' is not a version");
  }
  return version;
}

ApiServer::ApiServer(Workbench& workbench)
    : workbench_(workbench), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port_;
}

void ApiServer::listen() { server_->listen_after_bind(); }

int ApiServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::install_routes() {
  auto& s = *server_;
  Workbench& wb = workbench_;

  s.Get("/taxonomy", guarded([&wb](const httplib::Request&, httplib::Response& res) {
    const Taxonomy t = wb.snapshot();
    set_etag(res, t.version());
    res.status = 200;
    res.set_content(wb.canonical_text(), kJson);
  }));

  s.Get("/subtree", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
    const TypePath path = TypePath::parse(required_param(req, "path"));
    const Taxonomy t = wb.snapshot();
    const TypeNode& node = t.resolve(path);
    set_etag(res, t.version());
    send(res, 200, {{"path", path.str()}, {"version", t.version()}, {"branch", branch_to_json(node)}});
  }));

  s.Get("/stats", guarded([&wb](const httplib::Request&, httplib::Response& res) {
    const Taxonomy t = wb.snapshot();
    ordered_json body = {{"version", t.version()}};
    body.update(stats_to_json(compute_stats(t)));
    send(res, 200, body);
  }));

  s.Get("/search", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
    const std::string label = required_param(req, "label");
    const Taxonomy t = wb.snapshot();
    ordered_json paths = ordered_json::array();
    for (const auto& p : t.find_paths(Label(label))) paths.push_back(p.str());
    send(res, 200, {{"label", label}, {"version", t.version()}, {"paths", paths}});
  }));

  s.Post("/expansions", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
    const auto expected = if_match(req);
    ExpansionRequest request = request_from_json(body_json(req), 0);
    const ExpansionProposal proposal = wb.propose(std::move(request), expected);
    send(res, 201, proposal_view(proposal, wb.snapshot()));
  }));

  s.Get("/expansions", guarded([&wb](const httplib::Request&, httplib::Response& res) {
    ordered_json list = ordered_json::array();
    for (const auto& p : wb.proposals()) list.push_back(proposal_summary(p));
    send(res, 200, {{"version", wb.version()}, {"proposals", list}});
  }));

  s.Get(R"(/expansions/([^/]+))",
        guarded([&wb](const httplib::Request& req, httplib::Response& res) {
          const ExpansionProposal proposal = wb.proposal(req.matches[1]);
          send(res, 200, proposal_view(proposal, wb.snapshot()));
        }));

  s.Post(R"(/expansions/([^/]+)/decision)",
         guarded([&wb](const httplib::Request& req, httplib::Response& res) {
           const auto expected = if_match(req);
           const json body = body_json(req);
           const auto d = body.find("decision");
           if (d == body.end() || !d->is_string() ||
               (*d != "accept" && *d != "reject")) {
             throw Error(ErrorCode::schema_violation, "'decision' must be \"accept\" or \"reject\"");
           }
           const bool override_block = body.value("override", false);
           const auto outcome =
               wb.decide(req.matches[1], *d == "accept" ? Decision::accept : Decision::reject,
                         expected, override_block);
           set_etag(res, outcome.version);
           send(res, 200, {{"proposal", proposal_to_json(outcome.proposal)},
                           {"version", outcome.version}});
         }));

  s.Get("/combinations", guarded([&wb](const httplib::Request&, httplib::Response& res) {
    ordered_json rules = ordered_json::array();
    for (const auto& r : wb.rules()) rules.push_back(rule_to_json(r));
    send(res, 200, {{"rules", rules}});
  }));

  s.Post("/combinations/expand", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
    const auto expected = if_match(req);
    const json body = body_json(req);
    const auto rule = body.find("rule");
    if (rule == body.end() || !rule->is_string()) {
      throw Error(ErrorCode::schema_violation, "missing string 'rule'");
    }
    if (const auto parent = body.find("materialize"); parent != body.end()) {
      const auto outcome =
          wb.materialize_combination(rule->get<std::string>(), path_from(*parent, "materialize"),
                                     expected);
      set_etag(res, outcome.version);
      send(res, 200, {{"rule", outcome.branch.rule_name},
                      {"branch", branch_to_json(outcome.branch.generated)},
                      {"materialized", true},
                      {"version", outcome.version}});
      return;
    }
    const auto branch = wb.expand_combination(rule->get<std::string>());
    send(res, 200, {{"rule", branch.rule_name},
                    {"branch", branch_to_json(branch.generated)},
                    {"materialized", false},
                    {"version", wb.version()}});
  }));

  s.Get("/repetition", guarded([&wb](const httplib::Request&, httplib::Response& res) {
    send(res, 200, repetition_to_json(wb.repetition()));
  }));

  s.Post("/typing", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
    const json body = body_json(req);
    const typing::EntityMention mention = mention_from(body);
    typing::BeamConfig config;
    config.beam_width = positive(body, "beam_width", config.beam_width);
    config.max_depth = positive(body, "max_depth", config.max_depth);
    if (const auto it = body.find("stop_policy"); it != body.end()) {
      if (*it == "leaf-only") {
        config.stop_policy = typing::StopPolicy::leaf_only;
      } else if (*it != "scorer-may-stop") {
        throw Error(ErrorCode::schema_violation,
                    "'stop_policy' must be \"scorer-may-stop\" or \"leaf-only\"");
      }
    }
    ordered_json results = ordered_json::array();
    for (const auto& r : wb.type(mention, config)) results.push_back(typing_result_to_json(r));
    send(res, 200, {{"mention", std::string(mention.surface())}, {"results", results}});
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send(res, res.status, {{"error", "not-found"}, {"message", "no such endpoint"}});
    }
  });
}

}  // namespace taxwb
