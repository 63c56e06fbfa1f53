#include "taxwb/service/config.hpp"

#include <json.hpp>

#include "taxwb/core/error.hpp"
#include "taxwb/llm/scripted_backend.hpp"
#include "taxwb/service/document.hpp"

namespace taxwb {
namespace {

using nlohmann::json;

template <class T>
void read(const json& doc, const char* key, T& out) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::schema_violation, std::string("config key '") + key + "' has the wrong type");
  }
}

void read_path(const json& doc, const char* key, const std::filesystem::path& base,
               std::optional<std::filesystem::path>& out) {
  std::string value;
  read(doc, key, value);
  if (value.empty()) return;
  const std::filesystem::path p(value);
  out = p.is_absolute() ? p : base / p;
}

}  // namespace

BackendSpec BackendSpec::parse(std::string_view spec) {
  if (spec == "http") return BackendSpec{Kind::http, {}};
  constexpr std::string_view prefix = "scripted:";
  if (spec.starts_with(prefix) && spec.size() > prefix.size()) {
    return BackendSpec{Kind::scripted, std::filesystem::path(spec.substr(prefix.size()))};
  }
  throw Error(ErrorCode::parse,
              "backend '" + std::string(spec) + "' is neither 'http' nor 'scripted:FIXTURE'");
}

ServiceConfig ServiceConfig::parse(std::string_view json_text, const std::filesystem::path& base) {
  const auto doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::parse, "config is not a JSON object");
  }
  ServiceConfig config;
  read(doc, "context_budget", config.engine.context_budget);
  read(doc, "max_output_tokens", config.engine.max_output_tokens);
  read(doc, "temperature", config.engine.temperature);
  read(doc, "overlap_threshold", config.engine.validation.overlap_threshold);
  read(doc, "max_fanout", config.engine.validation.max_fanout);
  read(doc, "closed_vocabulary", config.engine.validation.closed_vocabulary);
  read_path(doc, "vocabulary", base, config.vocabulary);
  read_path(doc, "template_dir", base, config.template_dir);
  read_path(doc, "rules", base, config.rules);
  read_path(doc, "typing_scorer", base, config.typing_scorer);
  read_path(doc, "session_log", base, config.session_log);

  std::string backend;
  read(doc, "backend", backend);
  if (!backend.empty()) {
    config.backend = BackendSpec::parse(backend);
    if (config.backend->kind == BackendSpec::Kind::scripted &&
        config.backend->fixture.is_relative()) {
      config.backend->fixture = base / config.backend->fixture;
    }
  }
  if (const auto it = doc.find("http"); it != doc.end()) {
    if (!it->is_object()) throw Error(ErrorCode::schema_violation, "config key 'http' must be an object");
    read(*it, "endpoint", config.http.endpoint);
    read(*it, "model", config.http.model);
    read(*it, "token_env", config.http.token_env);
    read(*it, "retries", config.http.retries);
    read(*it, "retry_backoff_ms", config.http.retry_backoff_ms);
    read(*it, "connect_timeout_ms", config.http.connect_timeout_ms);
    read(*it, "read_timeout_ms", config.http.read_timeout_ms);
  }
  if (const auto it = doc.find("repetition"); it != doc.end()) {
    if (!it->is_object()) {
      throw Error(ErrorCode::schema_violation, "config key 'repetition' must be an object");
    }
    read(*it, "min_parents", config.repetition.min_parents);
    read(*it, "jaccard_threshold", config.repetition.jaccard_threshold);
  }
  return config;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& file) {
  return parse(read_text_file(file), file.has_parent_path() ? file.parent_path() : ".");
}

std::shared_ptr<llm::ChatBackend> make_backend(const BackendSpec& spec,
                                               const llm::HttpBackendConfig& http) {
  if (spec.kind == BackendSpec::Kind::scripted) {
    return std::make_shared<llm::ScriptedBackend>(llm::ScriptedFixture::load(spec.fixture));
  }
  return std::make_shared<llm::HttpBackend>(http);
}

llm::TemplateLibrary load_templates(const ServiceConfig& config) {
  return config.template_dir ? llm::TemplateLibrary::load_directory(*config.template_dir)
                             : llm::TemplateLibrary::builtin();
}

WorkbenchOptions make_workbench_options(const ServiceConfig& config, const Taxonomy& taxonomy) {
  WorkbenchOptions options;
  options.templates = load_templates(config);
  options.engine = config.engine;
  if (config.vocabulary) options.vocabulary = VocabularyConstraint::load(*config.vocabulary);
  if (config.rules) options.rules = load_rules(*config.rules, taxonomy);
  options.repetition = config.repetition;
  if (config.typing_scorer) {
    options.scorer =
        std::make_shared<typing::ScriptedScorer>(typing::ScriptedScorer::load(*config.typing_scorer));
  }
  options.log_path = config.session_log;
  return options;
}

}  // namespace taxwb
