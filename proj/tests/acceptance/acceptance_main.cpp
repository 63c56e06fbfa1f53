// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "api_harness.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_tree.hpp"
#include "taxwb/combination/combination.hpp"
#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/text.hpp"
#include "taxwb/expansion/engine.hpp"
#include "taxwb/expansion/session.hpp"
#include "taxwb/llm/scripted_backend.hpp"
#include "taxwb/service/cli.hpp"
#include "taxwb/service/document.hpp"
#include "taxwb/typing/typing.hpp"
#include "typing_oracle.hpp"

using namespace taxwb;
using testkit::fixture_path;
using testkit::load_fixture;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kLogScoreTolerance = 1e-9;
constexpr double kJaccardTolerance = 1e-12;

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  std::chrono::milliseconds limit;
  std::function<Outcome()> run;
};

TypePath path(std::string_view s) { return TypePath::parse(s); }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("taxwb-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Outcome closure_of_sun() {
  Outcome o;
  const Taxonomy t = load_fixture("celestial");
  const auto found = t.find_paths(Label("Sun"));
  o.check(found.size() == 1, "expected one Sun path, got " + std::to_string(found.size()));
  if (!o.ok) return o;
  std::multiset<std::string> got;
  for (const auto& l : typing::closure_labels(t, found[0])) got.insert(lower(l.str()));
  const std::multiset<std::string> want{"object", "celestial body", "sun", "star"};
  std::string shown;
  for (const auto& s : got) shown += (shown.empty() ? "" : ", ") + s;
  o.check(got == want, "closure is {" + shown + "}");
  o.detail = o.ok ? "{" + shown + "}" : o.detail;
  return o;
}

Outcome depth_ten() {
  Outcome o;
  const Taxonomy t = load_fixture("occupation_depth");
  const auto stats = compute_stats(t);
  o.check(stats.max_depth == 10, "max_depth=" + std::to_string(stats.max_depth));
  const auto counts = testkit::count_iteratively(t.root());
  o.check(counts.max_depth == 10, "iterative oracle depth " + std::to_string(counts.max_depth));
  bool surgeons_at_ten = false;
  for (const auto& p : t.find_paths(Label("Surgeons"))) {
    surgeons_at_ten |= p.depth() == 10 && p[0].str() == "Entity";
  }
  o.check(surgeons_at_ten, "no Entity ... Surgeons chain of depth 10");
  if (o.ok) o.detail = "max_depth=10 via Entity ... Surgeons";
  return o;
}

Outcome technology_path_label() {
  Outcome o;
  const std::string want =
      "Entity / Object / Physical Object / Non-living Beings / Artificial objects / "
      "Infrastructure / Technology";
  const Taxonomy t = load_fixture("technology");
  bool found = false;
  for (const auto& p : t.find_paths(Label("Technology"))) {
    found |= full_path_label(p) == want;
  }
  o.check(found, "no Technology path renders as the expected string");
  o.check(full_path_label(path(want)) == want, "parse/render round trip differs");
  if (o.ok) o.detail = want;
  return o;
}

Outcome replacement_locality() {
  Outcome o;
  std::mt19937_64 rng(20240401);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Taxonomy t(testkit::random_tree(rng, {.max_nodes = 500}));
    const TypePath p = testkit::random_path(rng, t.root());
    const TypeNode donor = testkit::random_tree(rng, {.max_nodes = 40});
    const TypeNode replacement(p.leaf(), {donor.children().begin(), donor.children().end()});
    const Taxonomy next = t.replace_branch(p, replacement);
    const bool outside_same =
        testkit::serialize_pruned(t.root(), p) == testkit::serialize_pruned(next.root(), p);
    const bool inside_new = next.resolve(p) == replacement;
    const bool versioned = next.version() == t.version() + 1;
    failures += !(outside_same && inside_new && versioned);
  }
  o.check(failures == 0, std::to_string(failures) + " of 1000 triples failed");
  if (o.ok) o.detail = "1000 triples, 0 failures";
  return o;
}

std::size_t count_nodes(const nlohmann::json& branch) {
  std::size_t n = 1;
  for (const auto& c : branch.value("children", nlohmann::json::array())) n += count_nodes(c);
  return n;
}

// Node count of the JSON object embedded in a reply, read straight from the
// fixture text.
std::size_t reply_branch_size(const std::string& response) {
  const auto first = response.find('{');
  const auto last = response.rfind('}');
  return count_nodes(nlohmann::json::parse(response.substr(first, last - first + 1)));
}

Outcome deterministic_session() {
  Outcome o;
  const fs::path dir = scratch_dir();
  const std::string seed_file = fixture_path("seed_default.json");
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("session" + std::to_string(run) + ".json");
    std::ostringstream sout, serr;
    const int code = run_cli({"session", seed_file, "--script", fixture_path("session_12_script.json"),
                              "--backend", "scripted:" + fixture_path("session_12.jsonl"), "--out",
                              out.string()},
                             sout, serr);
    o.check(code == kExitOk, "session run exited " + std::to_string(code) + ": " + serr.str());
    if (!o.ok) return o;
    bytes[run] = read_text_file(out);
  }
  o.check(bytes[0] == bytes[1], "canonical files differ between runs");

  // Arithmetic oracle: every scripted step expands a leaf, so it adds
  // (reply branch size - 1) nodes.
  const auto script = load_session_script(fixture_path("session_12_script.json"));
  std::vector<std::size_t> sizes;
  std::ifstream replies(fixture_path("session_12.jsonl"));
  for (std::string line; std::getline(replies, line);) {
    if (line.empty() || line[0] == '#') continue;
    sizes.push_back(reply_branch_size(nlohmann::json::parse(line).at("response")));
  }
  o.check(sizes.size() == script.size(), "fixture has " + std::to_string(sizes.size()) +
                                             " replies for " + std::to_string(script.size()) +
                                             " steps");
  if (!o.ok) return o;

  const Taxonomy seed = load_document(seed_file).taxonomy;
  std::size_t expected = compute_stats(seed).node_count;
  std::size_t previous = expected;
  for (std::size_t k = 1; k <= script.size(); ++k) {
    llm::ScriptedBackend backend(llm::ScriptedFixture::load(fixture_path("session_12.jsonl")));
    ExpansionEngine engine(backend, llm::TemplateLibrary::builtin(), {}, std::nullopt,
                           testkit::fixed_clock);
    SessionLog log;
    const auto result = run_session(seed, std::span(script).first(k), engine, log);
    const std::size_t now = compute_stats(result.taxonomy).node_count;
    expected += sizes[k - 1] - 1;
    o.check(now == expected, "after step " + std::to_string(k) + ": " + std::to_string(now) +
                                 " nodes, oracle " + std::to_string(expected));
    o.check(now - previous == sizes[k - 1] - 1, "step " + std::to_string(k) + " growth");
    previous = now;
  }
  const Taxonomy final_taxonomy = parse_document(bytes[0]).taxonomy;
  o.check(compute_stats(final_taxonomy).node_count == expected, "saved file node count");
  o.check(final_taxonomy.version() == 1 + script.size(), "saved file version");
  if (o.ok) {
    o.detail = "identical bytes; " + std::to_string(compute_stats(seed).node_count) + " -> " +
               std::to_string(expected) + " nodes";
  }
  fs::remove_all(dir);
  return o;
}

Outcome diagnostics() {
  Outcome o;
  const TypeNode old_branch = testkit::outline("Subject\n");
  const TypeNode family = testkit::outline(
      "Subject\n  Family\n    Family_Business\n    Family_History\n    Family_Name\n");
  const auto report = validate_branch(path("Entity / Subject"), family, &old_branch, nullptr, {});
  o.check(report.diagnostics.size() == 1 &&
              report.count(DiagnosticKind::lexical_overlap_grouping) == 1,
          "family proposal gave " + std::to_string(report.diagnostics.size()) + " diagnostics");

  const auto vocab = VocabularyConstraint::load(fixture_path("ultrafine_excerpt.txt"));
  const std::string term = "Flibbertigibbet";
  o.check(!vocab.contains(term), term + " is in the vocabulary list");
  const TypeNode star_old = testkit::outline("Star\n  Sun\n");
  const TypeNode star_new = testkit::outline("Star\n  Sun\n  " + term + "\n");
  const auto oov = validate_branch(path("Object / Celestial body / Star"), star_new, &star_old,
                                   &vocab, {});
  o.check(oov.diagnostics.size() == 1 && oov.count(DiagnosticKind::out_of_vocabulary) == 1,
          "out-of-vocabulary proposal gave " + std::to_string(oov.diagnostics.size()) +
              " diagnostics");
  if (o.ok) {
    o.detail = "1 lexical-overlap-grouping; 1 out-of-vocabulary (vocabulary excerpt, " +
               std::to_string(vocab.size()) + " entries)";
  }
  return o;
}

Outcome combination() {
  Outcome o;
  const Taxonomy t = load_fixture("combination");
  const auto rules = load_rules(fixture_path("combination_rules.json"), t);
  const auto rule = std::find_if(rules.begin(), rules.end(),
                                 [](const auto& r) { return r.name == "Countries by Continent"; });
  o.check(rule != rules.end(), "continent rule missing");
  if (!o.ok) return o;
  const auto branch = expand_rule(t, *rule);
  const auto& categories = branch.generated.children();
  o.check(categories.size() == 7, std::to_string(categories.size()) + " categories");
  o.check(std::any_of(categories.begin(), categories.end(),
                      [](const TypeNode& c) { return c.label().str() == "Countries in Europe"; }),
          "no \"Countries in Europe\"");

  const auto report = detect_repetition(load_fixture("repetition"));
  bool paired = false;
  for (const auto& m : report.mirrored_sibling_sets) {
    paired |= m.first.leaf().str() == "Continents" &&
              m.second.leaf().str() == "Countries --- By Continent" &&
              std::abs(m.jaccard - 6.0 / 7.0) <= kJaccardTolerance;
  }
  o.check(paired, "Continents and Countries --- By Continent not paired");
  if (o.ok) o.detail = "7 categories incl. \"Countries in Europe\"; parents paired at 6/7";
  return o;
}

Outcome beam_oracle() {
  Outcome o;
  const typing::EntityMention mention(
      "It is not an ordinary sun but a Cepheid variable, a pulsating star.", 32, 48);
  std::mt19937_64 rng(8);
  std::size_t failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Taxonomy t(testkit::random_tree(rng, {.max_nodes = 100}));
    const bool allow_stop = trial % 2 == 0;
    const auto policy =
        allow_stop ? typing::StopPolicy::scorer_may_stop : typing::StopPolicy::leaf_only;
    testkit::HashScorer scorer(7000 + trial, trial % 4 == 0 ? 5 : 0);
    const auto oracle = testkit::exhaustive_typing(mention, t.root(), scorer, 64, allow_stop);
    const auto full =
        typing::type_entity_beamed(mention, t, scorer, {.beam_width = oracle.size(), .stop_policy = policy});
    bool ok = !full.empty() && full.front().leaf_path.str() == oracle.front().path &&
              std::abs(*full.front().score - oracle.front().score) <= kLogScoreTolerance;

    double previous = -INFINITY;
    std::set<std::string> previous_paths;
    for (std::size_t w : {1u, 2u, 4u}) {
      const auto results =
          typing::type_entity_beamed(mention, t, scorer, {.beam_width = w, .stop_policy = policy});
      ok = ok && !results.empty() && *results.front().score >= previous;
      if (results.empty()) break;
      previous = *results.front().score;
      std::set<std::string> paths;
      for (const auto& r : results) paths.insert(r.leaf_path.str());
      for (const auto& p : previous_paths) ok = ok && paths.contains(p);
      previous_paths = std::move(paths);
    }
    failures += !ok;
  }
  o.check(failures == 0, std::to_string(failures) + " of 200 taxonomies failed");
  if (o.ok) o.detail = "200 taxonomies, 0 failures";
  return o;
}

Outcome persistence() {
  Outcome o;
  const fs::path dir = scratch_dir();
  std::mt19937_64 rng(31337);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Taxonomy t(testkit::random_tree(rng, {.max_nodes = 150}), 1 + rng() % 50);
    const fs::path a = dir / "a.json";
    const fs::path b = dir / "b.json";
    save_document(a, t);
    const Document loaded = load_document(a);
    save_document(b, loaded.taxonomy, loaded.metadata);
    failures += read_text_file(a) != read_text_file(b) || !loaded.taxonomy.same_content(t);
  }
  o.check(failures == 0, std::to_string(failures) + " of 1000 round trips differ");
  const Document imported = load_document(fixture_path("map_sample.json"));
  o.check(compute_stats(imported.taxonomy).node_count == 10, "sample is not 10 nodes");
  o.check(serialize_document(imported.taxonomy) == testkit::read_fixture("map_sample_canonical.json"),
          "imported sample differs from its canonical form");
  if (o.ok) o.detail = "1000 round trips, 0 failures; 10-node import exact";
  fs::remove_all(dir);
  return o;
}

Outcome concurrency() {
  Outcome o;
  const char* const schools = "Entity / Organization / Governmental / Schools";
  const char* const idea = "Entity / Subject / Idea";
  const Taxonomy base(testkit::outline("Entity\n  Organization\n    Governmental\n      Schools\n"
                                       "  Subject\n    Idea\n"),
                      1);
  auto propose = [](const testkit::ApiHarness& h, const char* p) {
    const auto r = h.post("/expansions", {{"mode", "expand"}, {"path", p}});
    return r.status == 201 ? r.body["proposal"]["id"].get<std::string>() : std::string();
  };
  auto accept = [](const testkit::ApiHarness& h, const std::string& id) {
    return h.post("/expansions/" + id + "/decision", {{"decision", "accept"}});
  };

  const std::string disjoint = testkit::expansion_reply(schools, {"Primary", "Secondary"}) +
                               testkit::expansion_reply(idea, {"Philosophy", "Concept"});
  std::string final_text[2];
  for (int order = 0; order < 2; ++order) {
    testkit::ApiHarness h(base, disjoint);
    const std::string a = propose(h, schools);
    const std::string b = propose(h, idea);
    o.check(!a.empty() && !b.empty(), "proposal creation failed");
    if (!o.ok) return o;
    const int s1 = accept(h, order == 0 ? a : b).status;
    const int s2 = accept(h, order == 0 ? b : a).status;
    o.check(s1 == 200 && s2 == 200, "disjoint accepts returned " + std::to_string(s1) + ", " +
                                        std::to_string(s2));
    final_text[order] = h.get("/taxonomy").text;
  }
  o.check(parse_document(final_text[0]).taxonomy.same_content(parse_document(final_text[1]).taxonomy),
          "disjoint accept orders give different taxonomies");

  const std::string overlapping = testkit::expansion_reply(schools, {"Primary"}) +
                                  testkit::expansion_reply(schools, {"Vocational"});
  testkit::ApiHarness h(base, overlapping);
  const std::string a = propose(h, schools);
  const std::string b = propose(h, schools);
  const auto ra = accept(h, a);
  const auto rb = accept(h, b);
  const int accepted = (ra.status == 200) + (rb.status == 200);
  const int conflicts = (ra.status == 409) + (rb.status == 409);
  o.check(accepted == 1 && conflicts == 1,
          "overlapping accepts returned " + std::to_string(ra.status) + ", " +
              std::to_string(rb.status));
  const auto loser = h.get("/expansions/" + b);
  o.check(loser.body["proposal"]["status"] == "superseded",
          "loser status " + loser.body["proposal"]["status"].dump());
  o.check(rb.body.value("error", "") == "stale-proposal", "loser error " + rb.body.dump());
  if (o.ok) o.detail = "disjoint orders identical; overlap 200 + 409 superseded";
  return o;
}

}  // namespace

int main() {
  using std::chrono::milliseconds;
  const std::vector<Criterion> criteria = {
      {1, "closure of Sun", milliseconds(1000), closure_of_sun},
      {2, "depth-10 chain", milliseconds(1000), depth_ten},
      {3, "Technology full path label", milliseconds(1000), technology_path_label},
      {4, "branch replacement locality", milliseconds(30000), replacement_locality},
      {5, "deterministic 12-step session", milliseconds(5000), deterministic_session},
      {6, "validation diagnostics", milliseconds(5000), diagnostics},
      {7, "combination and repetition", milliseconds(5000), combination},
      {8, "beam search vs exhaustive oracle", milliseconds(60000), beam_oracle},
      {9, "persistence fixed point", milliseconds(60000), persistence},
      {10, "concurrent proposals over HTTP", milliseconds(30000), concurrency},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const auto elapsed =
        std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - start);
    if (outcome.ok && elapsed > c.limit) {
      outcome = {false, "took " + std::to_string(elapsed.count()) + " ms, limit " +
                            std::to_string(c.limit.count()) + " ms"};
    }
    failures += !outcome.ok;
    std::printf("%s criterion %d: %s (%lld ms) %s\n", outcome.ok ? "PASS" : "FAIL", c.id, c.name,
                static_cast<long long>(elapsed.count()), outcome.detail.c_str());
  }
  std::fflush(stdout);
  return failures;
}
