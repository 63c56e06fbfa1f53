#include "api_harness.hpp"

namespace taxwb::testkit {

std::string expansion_reply(const std::string& path, const std::vector<std::string>& children) {
  const auto target = TypePath::parse(path);
  nlohmann::json branch = {{"label", target.leaf().str()}, {"children", nlohmann::json::array()}};
  for (const auto& c : children) {
    branch["children"].push_back({{"label", c}, {"children", nlohmann::json::array()}});
  }
  return nlohmann::json{{"match", "Branch to expand: " + path + "\n"}, {"response", branch.dump()}}
             .dump() +
         "\n";
}

ApiHarness::ApiHarness(Taxonomy taxonomy, const std::string& fixture_jsonl,
                       WorkbenchOptions options) {
  options.clock = fixed_clock;
  auto backend = std::make_shared<llm::ScriptedBackend>(llm::ScriptedFixture::parse(fixture_jsonl));
  workbench_ = std::make_unique<Workbench>(std::move(taxonomy), backend, std::move(options));
  server_ = std::make_unique<ApiServer>(*workbench_);
  port_ = server_->start("127.0.0.1", 0);
}

ApiHarness::~ApiHarness() { server_->stop(); }

httplib::Client ApiHarness::client() const {
  httplib::Client c("127.0.0.1", port_);
  c.set_read_timeout(std::chrono::seconds(10));
  return c;
}

namespace {

ApiHarness::Reply to_reply(const httplib::Result& result) {
  ApiHarness::Reply reply;
  if (!result) return reply;
  reply.status = result->status;
  reply.text = result->body;
  reply.body = nlohmann::json::parse(result->body, nullptr, false);
  reply.etag = result->get_header_value("ETag");
  return reply;
}

}  // namespace

ApiHarness::Reply ApiHarness::get(const std::string& path) const {
  auto c = client();
  return to_reply(c.Get(path));
}

ApiHarness::Reply ApiHarness::post(const std::string& path, const nlohmann::json& body,
                                   std::optional<std::uint64_t> if_match) const {
  auto c = client();
  httplib::Headers headers;
  if (if_match) headers.emplace("If-Match", "\"" + std::to_string(*if_match) + "\"");
  return to_reply(c.Post(path, headers, body.dump(), "application/json"));
}

}  // namespace taxwb::testkit
