#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "api_harness.hpp"
#include "fixtures.hpp"
#include "taxwb/core/text.hpp"
#include "taxwb/service/document.hpp"

using namespace taxwb;
using taxwb::testkit::ApiHarness;
using taxwb::testkit::expansion_reply;
using taxwb::testkit::load_fixture;
using taxwb::testkit::outline;
namespace fs = std::filesystem;

namespace {

const char* const kGov = "Entity / Organization / Governmental";
const char* const kSchools = "Entity / Organization / Governmental / Schools";
const char* const kIdea = "Entity / Subject / Idea";

Taxonomy small_tree() {
  return Taxonomy(outline("Entity\n"
                          "  Organization\n"
                          "    Governmental\n"
                          "      Schools\n"
                          "  Subject\n"
                          "    Idea\n"
                          "  Time\n"),
                  1);
}

nlohmann::json expand(const std::string& path) { return {{"mode", "expand"}, {"path", path}}; }

std::string propose(const ApiHarness& h, const std::string& path,
                    std::optional<std::uint64_t> if_match = std::nullopt) {
  const auto reply = h.post("/expansions", expand(path), if_match);
  EXPECT_EQ(reply.status, 201) << reply.text;
  return reply.body["proposal"]["id"].get<std::string>();
}

ApiHarness::Reply decide(const ApiHarness& h, const std::string& id, const char* decision,
                         std::optional<std::uint64_t> if_match = std::nullopt) {
  return h.post("/expansions/" + id + "/decision", {{"decision", decision}}, if_match);
}

std::vector<std::string> child_labels(const nlohmann::json& branch) {
  std::vector<std::string> out;
  for (const auto& c : branch["children"]) out.push_back(c["label"]);
  return out;
}

class SlowBackend : public llm::ChatBackend {
 public:
  std::string id() const override { return "slow"; }
  std::promise<void> entered;
  std::promise<void> release;

 protected:
  std::string do_complete(const llm::ChatRequest&) override {
    entered.set_value();
    release.get_future().wait();
    return R"({"label": "Idea", "children": [{"label": "Theory"}]})";
  }
};

}  // namespace

TEST(ApiTest, StatusMapping) {
  EXPECT_EQ(http_status_for(ErrorCode::path_not_found), 404);
  EXPECT_EQ(http_status_for(ErrorCode::unknown_proposal), 404);
  EXPECT_EQ(http_status_for(ErrorCode::stale_proposal), 409);
  EXPECT_EQ(http_status_for(ErrorCode::version_conflict), 409);
  EXPECT_EQ(http_status_for(ErrorCode::fixture_miss), 502);
  EXPECT_EQ(http_status_for(ErrorCode::schema_violation), 400);
  EXPECT_EQ(http_status_for(ErrorCode::io), 500);
  EXPECT_EQ(parse_if_match("7"), 7u);
  EXPECT_EQ(parse_if_match("\"7\""), 7u);
  EXPECT_EQ(parse_if_match(" W/\"12\" "), 12u);
  EXPECT_THROW(parse_if_match("abc"), Error);
  EXPECT_THROW(parse_if_match("\"\""), Error);
}

TEST(ApiTest, ReadEndpoints) {
  const Document tech = load_document(testkit::fixture_path("technology.json"));
  ApiHarness h(tech.taxonomy, "", {.metadata = tech.metadata});
  const auto doc = h.get("/taxonomy");
  EXPECT_EQ(doc.status, 200);
  EXPECT_EQ(doc.etag, "\"1\"");
  EXPECT_EQ(doc.text, testkit::read_fixture("technology.json"));

  const auto search = h.get("/search?label=technology");
  ASSERT_EQ(search.status, 200);
  EXPECT_EQ(search.body["paths"].size(), 2u) << search.text;

  const auto stats = h.get("/stats");
  EXPECT_EQ(stats.status, 200);
  EXPECT_EQ(stats.body["node_count"], compute_stats(h.workbench().snapshot()).node_count);

  const auto sub = h.get("/subtree?path=Entity%20%2F%20Object");
  EXPECT_EQ(sub.status, 200) << sub.text;
  EXPECT_EQ(sub.body["branch"]["label"], "Object");
}

TEST(ApiTest, ErrorResponses) {
  ApiHarness h(small_tree(), "");
  auto r = h.get("/subtree?path=Entity%20%2F%20Nowhere");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["error"], "path-not-found");
  EXPECT_EQ(h.get("/subtree").status, 400);
  EXPECT_EQ(h.get("/expansions/p-999").status, 404);
  EXPECT_EQ(h.get("/no/such/endpoint").status, 404);

  r = h.post("/expansions", {{"mode", "sideways"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_TRUE(r.body.contains("message"));

  auto c = h.client();
  const auto bad = c.Post("/expansions", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  r = h.post("/expansions", expand(kGov));
  EXPECT_EQ(r.status, 502) << r.text;
  EXPECT_EQ(r.body["error"], "fixture-miss");
  EXPECT_EQ(h.workbench().version(), 1u);
}

TEST(ApiTest, ExpandThenAcceptGrowsTheBranch) {
  ApiHarness h(small_tree(), expansion_reply(kSchools, {"Primary", "Secondary", "Tertiary"}));
  const auto created = h.post("/expansions", expand(kSchools));
  ASSERT_EQ(created.status, 201) << created.text;
  EXPECT_EQ(created.body["proposal"]["status"], "pending");
  EXPECT_EQ(created.body["diff"]["added"].size(), 3u);
  const std::string id = created.body["proposal"]["id"];

  const auto listed = h.get("/expansions");
  ASSERT_EQ(listed.body["proposals"].size(), 1u);
  EXPECT_EQ(listed.body["proposals"][0]["id"], id);

  const auto accepted = decide(h, id, "accept");
  ASSERT_EQ(accepted.status, 200) << accepted.text;
  EXPECT_EQ(accepted.body["version"], 2);
  EXPECT_EQ(accepted.etag, "\"2\"");
  EXPECT_EQ(accepted.body["proposal"]["status"], "accepted");

  const auto sub = h.get("/subtree?path=" + std::string("Entity%20%2F%20Organization%20%2F%20"
                                                        "Governmental%20%2F%20Schools"));
  EXPECT_EQ(child_labels(sub.body["branch"]),
            (std::vector<std::string>{"Primary", "Secondary", "Tertiary"}));

  const auto again = decide(h, id, "accept");
  EXPECT_EQ(again.status, 409);
  EXPECT_EQ(again.body["error"], "proposal-not-pending");
  EXPECT_EQ(decide(h, id, "maybe").status, 400);
  EXPECT_EQ(h.workbench().version(), 2u);
}

TEST(ApiTest, RejectLeavesVersionAlone) {
  ApiHarness h(small_tree(), expansion_reply(kSchools, {"Primary"}));
  const std::string id = propose(h, kSchools);
  const auto r = decide(h, id, "reject");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["proposal"]["status"], "rejected");
  EXPECT_EQ(r.body["version"], 1);
}

TEST(ApiTest, DisjointAcceptsCommuteThroughHttp) {
  const std::string replies =
      expansion_reply(kSchools, {"Primary", "Secondary"}) + expansion_reply(kIdea, {"Concept"});
  std::string final_text[2];
  for (int order = 0; order < 2; ++order) {
    ApiHarness h(small_tree(), replies);
    const std::string a = propose(h, kSchools);
    const std::string b = propose(h, kIdea);
    const auto first = decide(h, order == 0 ? a : b, "accept");
    const auto second = decide(h, order == 0 ? b : a, "accept");
    ASSERT_EQ(first.status, 200) << first.text;
    ASSERT_EQ(second.status, 200) << second.text;
    EXPECT_EQ(second.body["version"], 3);
    final_text[order] = h.get("/taxonomy").text;
  }
  EXPECT_EQ(final_text[0], final_text[1]);
}

TEST(ApiTest, OverlappingAcceptsSupersedeTheLoser) {
  for (const bool accept_ancestor : {false, true}) {
    const std::string replies = expansion_reply(kSchools, {"Primary"}) +
                                expansion_reply(kGov, {"Schools", "Agencies"}) +
                                expansion_reply(kSchools, {"Secondary"});
    ApiHarness h(small_tree(), replies);
    const std::string schools_a = propose(h, kSchools);
    const std::string gov = propose(h, kGov);
    const std::string schools_b = propose(h, kSchools);

    // Same path: one wins, the other is superseded.
    EXPECT_EQ(decide(h, schools_a, "accept").status, 200);
    const auto lost = decide(h, schools_b, "accept");
    EXPECT_EQ(lost.status, 409);
    EXPECT_EQ(lost.body["error"], "stale-proposal");
    EXPECT_EQ(lost.body["proposal"]["status"], "superseded");
    EXPECT_EQ(h.get("/expansions/" + schools_b).body["proposal"]["status"], "superseded");

    // Ancestor whose subtree changed underneath it.
    const auto r = decide(h, gov, accept_ancestor ? "accept" : "reject");
    if (accept_ancestor) {
      EXPECT_EQ(r.status, 409);
      EXPECT_EQ(r.body["proposal"]["status"], "superseded");
    } else {
      EXPECT_EQ(r.status, 200);
    }
    EXPECT_EQ(h.workbench().version(), 2u);
  }
}

TEST(ApiTest, IfMatchGuardsTheTouchedSubtree) {
  const std::string replies = expansion_reply(kSchools, {"Primary"}) +
                              expansion_reply(kIdea, {"Concept"}) +
                              expansion_reply(kSchools, {"Secondary"});
  ApiHarness h(small_tree(), replies);
  const std::string a = propose(h, kSchools, 1);
  ASSERT_EQ(decide(h, a, "accept", 1).status, 200);

  // Version 1 is stale, but the Idea subtree did not change since.
  const std::string b = propose(h, kIdea, 1);
  EXPECT_EQ(decide(h, b, "accept", 1).status, 200);

  const auto conflict = h.post("/expansions", expand(kSchools), 1);
  EXPECT_EQ(conflict.status, 409);
  EXPECT_EQ(conflict.body["error"], "version-conflict");
  EXPECT_EQ(h.post("/expansions", expand(kSchools), 99).status, 409);
  auto c = h.client();
  const auto garbled =
      c.Post("/expansions", {{"If-Match", "soon"}}, expand(kSchools).dump(), "application/json");
  ASSERT_TRUE(garbled);
  EXPECT_EQ(garbled->status, 400);
  EXPECT_EQ(h.workbench().version(), 3u);
}

TEST(ApiTest, ReadsAreNotBlockedBySlowProposals) {
  auto backend = std::make_shared<SlowBackend>();
  auto entered = backend->entered.get_future();
  Workbench wb(small_tree(), backend, {.clock = testkit::fixed_clock});
  ApiServer server(wb);
  const int port = server.start("127.0.0.1", 0);

  auto pending = std::async(std::launch::async, [&] {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(std::chrono::seconds(10));
    auto r = c.Post("/expansions", expand(kIdea).dump(), "application/json");
    return r ? r->status : -1;
  });
  ASSERT_EQ(entered.wait_for(std::chrono::seconds(5)), std::future_status::ready);

  httplib::Client reader("127.0.0.1", port);
  const auto start = std::chrono::steady_clock::now();
  const auto r = reader.Get("/taxonomy");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_LT(elapsed, std::chrono::seconds(2));

  backend->release.set_value();
  EXPECT_EQ(pending.get(), 201);
  server.stop();
}

TEST(ApiTest, TypingEndpoint) {
  WorkbenchOptions options;
  options.scorer = std::make_shared<typing::ScriptedScorer>(
      typing::ScriptedScorer::load(testkit::fixture_path("scorer_sun.json")));
  ApiHarness h(load_fixture("sky"), "", std::move(options));
  const std::string sentence = "It is not an ordinary sun but a Cepheid variable, a pulsating star.";
  const auto r = h.post("/typing", {{"sentence", sentence}, {"span", "22:25"}, {"beam_width", 2}});
  ASSERT_EQ(r.status, 200) << r.text;
  EXPECT_EQ(r.body["mention"], "sun");
  ASSERT_FALSE(r.body["results"].empty());
  EXPECT_EQ(r.body["results"][0]["path"],
            "Object / Celestial body / Star / Sun");
  EXPECT_EQ(r.body["results"][0]["closure"].size(), 4u);

  EXPECT_EQ(h.post("/typing", {{"sentence", sentence}, {"span", "40:20"}}).status, 400);
  EXPECT_EQ(h.post("/typing", {{"sentence", sentence}, {"span", {22, 25}}, {"beam_width", 0}})
                .status,
            400);
  EXPECT_EQ(h.post("/typing", {{"span", "1:2"}}).status, 400);
}

TEST(ApiTest, CombinationExpandAndMaterialize) {
  const Taxonomy t = load_fixture("combination");
  WorkbenchOptions options;
  options.rules = load_rules(testkit::fixture_path("combination_rules.json"), t);
  ApiHarness h(t, "", std::move(options));

  EXPECT_EQ(h.get("/combinations").body["rules"].size(), h.workbench().rules().size());
  const auto preview = h.post("/combinations/expand", {{"rule", "Countries by Continent"}});
  ASSERT_EQ(preview.status, 200) << preview.text;
  EXPECT_FALSE(preview.body["materialized"].get<bool>());
  EXPECT_EQ(preview.body["branch"]["children"].size(), 7u);
  EXPECT_EQ(h.workbench().version(), 1u);

  const std::string parent = "Entity / Location / Geographic";
  const auto made = h.post("/combinations/expand",
                           {{"rule", "Countries by Continent"}, {"materialize", parent}}, 1);
  ASSERT_EQ(made.status, 200) << made.text;
  EXPECT_EQ(made.body["version"], 2);
  const auto twice = h.post("/combinations/expand",
                            {{"rule", "Countries by Continent"}, {"materialize", parent}});
  EXPECT_EQ(twice.status, 409) << twice.text;
  EXPECT_EQ(h.post("/combinations/expand", {{"rule", "Nope"}}).status, 404);

  const auto rep = h.get("/repetition");
  EXPECT_EQ(rep.status, 200);
}

TEST(ApiTest, SavesAndLogsEveryCommit) {
  const fs::path dir = fs::temp_directory_path() / ("taxwb-api-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  WorkbenchOptions options;
  options.save_path = dir / "t.json";
  options.log_path = dir / "session.jsonl";
  {
    ApiHarness h(small_tree(), expansion_reply(kSchools, {"Primary"}), std::move(options));
    const std::string id = propose(h, kSchools);
    ASSERT_EQ(decide(h, id, "accept").status, 200);
    EXPECT_EQ(read_text_file(dir / "t.json"), h.get("/taxonomy").text);
    EXPECT_EQ(load_document(dir / "t.json").taxonomy.version(), 2u);
  }
  std::vector<std::string> events;
  std::ifstream log(dir / "session.jsonl");
  for (std::string line; std::getline(log, line);) {
    events.push_back(nlohmann::json::parse(line)["event"]);
  }
  EXPECT_EQ(events, (std::vector<std::string>{"request", "proposal", "decision"}));
  fs::remove_all(dir);
}
