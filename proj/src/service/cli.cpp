#include "taxwb/service/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>

#include "taxwb/combination/combination.hpp"
#include "taxwb/core/branch_json.hpp"
#include "taxwb/core/error.hpp"
#include "taxwb/expansion/engine.hpp"
#include "taxwb/expansion/session.hpp"
#include "taxwb/service/api_server.hpp"
#include "taxwb/service/config.hpp"
#include "taxwb/service/document.hpp"
#include "taxwb/service/views.hpp"
#include "taxwb/typing/typing.hpp"

namespace taxwb {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;

  std::string file;
  std::string out;
  std::string root;
  bool force = false;
  bool seed_default = false;
  std::string label;
  bool case_sensitive = false;
  std::string path;
  std::string backend;
  std::string instructions;
  bool auto_accept = false;
  bool override_block = false;
  std::string script;
  std::string log;
  std::string rules;
  std::string rule;
  std::string materialize;
  std::size_t min_parents = 2;
  double jaccard = 0.6;
  std::string vocab;
  bool closed = false;
  std::string sentence;
  std::string span;
  std::string scorer;
  std::size_t beam = 3;
  std::size_t max_depth = 64;
  bool leaf_only = false;
  std::size_t top = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
};

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {
    if (!o_.config.empty()) config_ = ServiceConfig::load(o_.config);
  }

  int init() {
    if (fs::exists(o_.out) && !o_.force) {
      throw Error(ErrorCode::io, "'" + o_.out + "' exists; pass --force to overwrite");
    }
    save_document(o_.out, Taxonomy(TypeNode(Label(o_.root))));
    return kExitOk;
  }

  int seed() {
    if (!o_.seed_default) {
      err_ << "seed: only --default is available\n";
      return kExitUsage;
    }
    const Taxonomy seed = default_seed();
    if (o_.out.empty()) {
      out_ << serialize_document(seed);
    } else {
      save_document(o_.out, seed);
    }
    return kExitOk;
  }

  int import() {
    const Document doc = load_document(o_.file);
    save_or_print(doc.taxonomy, doc.metadata);
    return kExitOk;
  }

  int stats() {
    const auto s = compute_stats(load_document(o_.file).taxonomy);
    out_ << "node_count=" << s.node_count << "\n"
         << "leaf_count=" << s.leaf_count << "\n"
         << "max_depth=" << s.max_depth << "\n"
         << "duplicate_label_count=" << s.duplicate_label_count << "\n";
    for (const auto& [depth, count] : s.per_depth_counts) {
      out_ << "depth_" << depth << "=" << count << "\n";
    }
    return kExitOk;
  }

  int paths() {
    const Taxonomy t = load_document(o_.file).taxonomy;
    const auto found = t.find_paths(Label(o_.label), o_.case_sensitive);
    for (const auto& p : found) out_ << p.str() << "\n";
    return found.empty() ? kExitData : kExitOk;
  }

  int closure() {
    const Taxonomy t = load_document(o_.file).taxonomy;
    for (const auto& label : typing::closure_labels(t, TypePath::parse(o_.path))) {
      out_ << label.str() << "\n";
    }
    return kExitOk;
  }

  int propose(ExpansionRequest (*make)(const Options&, std::uint64_t)) {
    const Document doc = load_document(o_.file);
    auto backend = backend_from_options();
    ExpansionEngine engine(*backend, load_templates(config_), config_.engine, vocabulary());
    const ExpansionProposal proposal = engine.propose(doc.taxonomy, make(o_, doc.taxonomy.version()));
    out_ << proposal_view(proposal, doc.taxonomy).dump(2, ' ', false) << "\n";
    if (proposal.status == ProposalStatus::failed) {
      err_ << "proposal failed: " << to_string(*proposal.error) << ": " << proposal.error_message
           << "\n";
      return kExitBackend;
    }
    if (!o_.auto_accept) return kExitOk;
    if (proposal.validation.verdict == Verdict::blocked && !o_.override_block) {
      err_ << "proposal " << proposal.id << " is blocked by validation; not applied\n";
      return kExitData;
    }
    const ApplyResult applied =
        apply_proposal(doc.taxonomy, proposal, Decision::accept, o_.override_block);
    save_document(o_.out.empty() ? o_.file : o_.out, applied.taxonomy, doc.metadata);
    err_ << "accepted " << proposal.id << ": version " << applied.taxonomy.version() << "\n";
    return kExitOk;
  }

  int session() {
    const Document doc = load_document(o_.file);
    const auto script = load_session_script(o_.script);
    auto backend = backend_from_options();
    ExpansionEngine engine(*backend, load_templates(config_), config_.engine, vocabulary());
    std::ofstream log_file;
    if (!o_.log.empty()) {
      log_file.open(o_.log, std::ios::binary | std::ios::trunc);
      if (!log_file) throw Error(ErrorCode::io, "cannot write session log '" + o_.log + "'");
    }
    SessionLog log(o_.log.empty() ? nullptr : &log_file);
    const SessionResult result = run_session(doc.taxonomy, script, engine, log);
    save_document(o_.out.empty() ? o_.file : o_.out, result.taxonomy, doc.metadata);
    std::size_t accepted = 0;
    for (const auto& p : result.proposals) accepted += p.status == ProposalStatus::accepted;
    out_ << "steps=" << script.size() << "\n"
         << "accepted=" << accepted << "\n"
         << "version=" << result.taxonomy.version() << "\n"
         << "node_count=" << compute_stats(result.taxonomy).node_count << "\n";
    return kExitOk;
  }

  int combine() {
    const Document doc = load_document(o_.file);
    const auto rules = load_rules(o_.rules, doc.taxonomy);
    const auto it = std::find_if(rules.begin(), rules.end(),
                                 [&](const CombinationRule& r) { return r.name == o_.rule; });
    if (it == rules.end()) throw Error(ErrorCode::unknown_rule, "no rule named '" + o_.rule + "'");
    const VirtualBranch branch = expand_rule(doc.taxonomy, *it);
    out_ << canonical_branch_text(branch.generated) << "\n";
    if (!o_.materialize.empty()) {
      const Taxonomy next = materialize(doc.taxonomy, branch, TypePath::parse(o_.materialize));
      save_document(o_.out.empty() ? o_.file : o_.out, next, doc.metadata);
    }
    return kExitOk;
  }

  int detect_repetition() {
    const Taxonomy t = load_document(o_.file).taxonomy;
    RepetitionConfig config = config_.repetition;
    config.min_parents = o_.min_parents;
    config.jaccard_threshold = o_.jaccard;
    out_ << repetition_to_json(taxwb::detect_repetition(t, config)).dump(2, ' ', false) << "\n";
    return kExitOk;
  }

  int validate() {
    const Taxonomy t = load_document(o_.file).taxonomy;
    ValidationConfig config = config_.engine.validation;
    if (o_.closed) config.closed_vocabulary = true;
    const auto vocab = vocabulary();
    const auto report = validate_branch(t.root_path(), t.root(), nullptr,
                                        vocab ? &*vocab : nullptr, config);
    out_ << report_to_json(report).dump(2, ' ', false) << "\n";
    return report.verdict == Verdict::blocked ? kExitData : kExitOk;
  }

  int type() {
    const Taxonomy t = load_document(o_.file).taxonomy;
    const auto mention = typing::EntityMention::from_span(o_.sentence, o_.span);
    std::shared_ptr<llm::ChatBackend> backend;
    std::unique_ptr<typing::NodeScorer> scorer;
    if (o_.scorer == "llm") {
      backend = backend_from_options();
      scorer = std::make_unique<typing::LlmScorer>(
          *backend, load_templates(config_).get(llm::kChooseTemplate));
    } else if (o_.scorer.starts_with("scripted:")) {
      scorer = std::make_unique<typing::ScriptedScorer>(
          typing::ScriptedScorer::load(o_.scorer.substr(9)));
    } else {
      err_ << "type: --scorer must be scripted:FIXTURE or llm\n";
      return kExitUsage;
    }
    typing::BeamConfig config;
    config.beam_width = o_.beam;
    config.max_depth = o_.max_depth;
    if (o_.leaf_only) config.stop_policy = typing::StopPolicy::leaf_only;
    const auto results = typing::type_entity_beamed(mention, t, *scorer, config);
    std::size_t shown = 0;
    for (const auto& r : results) {
      if (o_.top != 0 && shown++ == o_.top) break;
      out_ << std::fixed << std::setprecision(6) << *r.score << "\t" << r.leaf_path.str() << "\n";
    }
    return kExitOk;
  }

  int serve() {
    const Document doc = load_document(o_.file);
    WorkbenchOptions options = make_workbench_options(config_, doc.taxonomy);
    if (!o_.rules.empty()) options.rules = load_rules(o_.rules, doc.taxonomy);
    if (!o_.scorer.empty()) {
      if (!o_.scorer.starts_with("scripted:")) {
        err_ << "serve: --scorer must be scripted:FIXTURE\n";
        return kExitUsage;
      }
      options.scorer = std::make_shared<typing::ScriptedScorer>(
          typing::ScriptedScorer::load(o_.scorer.substr(9)));
    }
    if (!o_.log.empty()) options.log_path = o_.log;
    options.save_path = o_.file;
    options.metadata = doc.metadata;
    Workbench workbench(doc.taxonomy, backend_from_options(), std::move(options));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    ApiServer server(workbench);
    const int port = server.start(o_.host, o_.port);
    out_ << "listening on http://" << o_.host << ":" << port << std::endl;
    int signal = 0;
    sigwait(&signals, &signal);
    server.stop();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    return kExitOk;
  }

 private:
  std::shared_ptr<llm::ChatBackend> backend_from_options() const {
    if (!o_.backend.empty()) return make_backend(BackendSpec::parse(o_.backend), config_.http);
    if (config_.backend) return make_backend(*config_.backend, config_.http);
    return make_backend(BackendSpec{}, config_.http);
  }

  std::optional<VocabularyConstraint> vocabulary() const {
    if (!o_.vocab.empty()) return VocabularyConstraint::load(o_.vocab);
    if (config_.vocabulary) return VocabularyConstraint::load(*config_.vocabulary);
    return std::nullopt;
  }

  void save_or_print(const Taxonomy& t, const nlohmann::ordered_json& metadata) {
    if (o_.out.empty()) {
      out_ << serialize_document(t, metadata);
    } else {
      save_document(o_.out, t, metadata);
    }
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  ServiceConfig config_;
};

ExpansionRequest expand_request(const Options& o, std::uint64_t version) {
  return ExpansionRequest::expand(TypePath::parse(o.path), version, o.instructions);
}

ExpansionRequest insert_request(const Options& o, std::uint64_t version) {
  return ExpansionRequest::insert(Label(o.label), version, o.instructions);
}

}  // namespace

int exit_code_for(const Error& error) noexcept {
  switch (error.code()) {
    case ErrorCode::fixture_miss:
    case ErrorCode::network:
    case ErrorCode::http_status:
    case ErrorCode::timeout:
    case ErrorCode::no_json_found:
      return kExitBackend;
    default:
      return kExitData;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Taxonomy construction and curation workbench", "taxwb"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);

  auto file_arg = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "Taxonomy file")->required();
  };
  auto backend_opt = [&](CLI::App* sub) {
    sub->add_option("--backend", o.backend, "http or scripted:FIXTURE");
  };

  auto* init = app.add_subcommand("init", "Write a single-node taxonomy");
  init->add_option("--root", o.root, "Root label")->required();
  init->add_option("--out", o.out, "Destination file")->required();
  init->add_flag("--force", o.force, "Overwrite an existing file");

  auto* seed = app.add_subcommand("seed", "Write the seven-category seed taxonomy");
  seed->add_flag("--default", o.seed_default, "Entity with Object, Time, Location, ...");
  seed->add_option("--out", o.out, "Destination file (default: stdout)");

  auto* import = app.add_subcommand("import", "Convert a branch or label-map file to canonical form");
  file_arg(import);
  import->add_option("--out", o.out, "Destination file (default: stdout)");

  auto* stats = app.add_subcommand("stats", "Print node, leaf, depth and duplicate counts");
  file_arg(stats);

  auto* paths = app.add_subcommand("paths", "List every full path of a label");
  file_arg(paths);
  paths->add_option("--label", o.label)->required();
  paths->add_flag("--case-sensitive", o.case_sensitive);

  auto* closure = app.add_subcommand("closure", "Print the ancestor closure of a path");
  file_arg(closure);
  closure->add_option("--path", o.path, "\"A / B / C\"")->required();

  auto proposal_opts = [&](CLI::App* sub) {
    file_arg(sub);
    backend_opt(sub);
    sub->add_option("--instructions", o.instructions);
    sub->add_option("--vocab", o.vocab, "Closed vocabulary list")->check(CLI::ExistingFile);
    sub->add_flag("--auto-accept", o.auto_accept, "Apply the proposal unless blocked");
    sub->add_flag("--override", o.override_block, "With --auto-accept, apply even when blocked");
    sub->add_option("--out", o.out, "Write the result here instead of FILE");
  };
  auto* expand = app.add_subcommand("expand", "Propose an expansion of a subtree");
  proposal_opts(expand);
  expand->add_option("--path", o.path)->required();

  auto* insert = app.add_subcommand("insert", "Propose a placement for a new type");
  proposal_opts(insert);
  insert->add_option("--label", o.label)->required();

  auto* session = app.add_subcommand("session", "Run a scripted sequence of requests");
  file_arg(session);
  backend_opt(session);
  session->add_option("--script", o.script)->required()->check(CLI::ExistingFile);
  session->add_option("--log", o.log, "JSON-lines session log");
  session->add_option("--vocab", o.vocab)->check(CLI::ExistingFile);
  session->add_option("--out", o.out, "Write the result here instead of FILE");

  auto* combine = app.add_subcommand("combine", "Expand a combination rule");
  file_arg(combine);
  combine->add_option("--rules", o.rules)->required()->check(CLI::ExistingFile);
  combine->add_option("--expand", o.rule, "Rule name")->required();
  combine->add_option("--materialize", o.materialize, "Insert the branch under this path");
  combine->add_option("--out", o.out, "Write the result here instead of FILE");

  auto* repetition = app.add_subcommand("detect-repetition", "Report duplicated labels and mirrored sibling sets");
  file_arg(repetition);
  repetition->add_option("--min-parents", o.min_parents)->check(CLI::PositiveNumber);
  repetition->add_option("--jaccard", o.jaccard)->check(CLI::Range(0.0, 1.0));

  auto* validate = app.add_subcommand("validate", "Validate a whole taxonomy");
  file_arg(validate);
  validate->add_option("--vocab", o.vocab, "Vocabulary list, one type per line")
      ->check(CLI::ExistingFile);
  validate->add_flag("--closed", o.closed, "Out-of-vocabulary labels block");

  auto* type = app.add_subcommand("type", "Type an entity mention by beam search");
  file_arg(type);
  type->add_option("--sentence", o.sentence)->required();
  type->add_option("--span", o.span, "START:END character offsets")->required();
  type->add_option("--scorer", o.scorer, "scripted:FIXTURE or llm")->required();
  backend_opt(type);
  type->add_option("--beam", o.beam)->check(CLI::PositiveNumber);
  type->add_option("--max-depth", o.max_depth)->check(CLI::PositiveNumber);
  type->add_flag("--leaf-only", o.leaf_only);
  type->add_option("--top", o.top, "Print only the best N results");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  file_arg(serve);
  backend_opt(serve);
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535));
  serve->add_option("--rules", o.rules)->check(CLI::ExistingFile);
  serve->add_option("--scorer", o.scorer, "scripted:FIXTURE (default: LLM scorer)");
  serve->add_option("--log", o.log, "Append-only JSON-lines session log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Runner run(o, out, err);
    if (init->parsed()) return run.init();
    if (seed->parsed()) return run.seed();
    if (import->parsed()) return run.import();
    if (stats->parsed()) return run.stats();
    if (paths->parsed()) return run.paths();
    if (closure->parsed()) return run.closure();
    if (expand->parsed()) return run.propose(expand_request);
    if (insert->parsed()) return run.propose(insert_request);
    if (session->parsed()) return run.session();
    if (combine->parsed()) return run.combine();
    if (repetition->parsed()) return run.detect_repetition();
    if (validate->parsed()) return run.validate();
    if (type->parsed()) return run.type();
    if (serve->parsed()) return run.serve();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"taxwb"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace taxwb
