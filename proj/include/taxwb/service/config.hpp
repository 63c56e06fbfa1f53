#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "taxwb/llm/http_backend.hpp"
#include "taxwb/service/workbench.hpp"

namespace taxwb {

/// "scripted:FIXTURE" or "http".
struct BackendSpec {
  enum class Kind { scripted, http };
  Kind kind = Kind::http;
  std::filesystem::path fixture;

  static BackendSpec parse(std::string_view spec);
};

/// JSON config file. Every key is optional; relative paths resolve against
/// the config file's directory.
///   context_budget, max_output_tokens, temperature,
///   overlap_threshold, max_fanout, closed_vocabulary, vocabulary,
///   template_dir, rules, typing_scorer, session_log, backend ("http" or
///   "scripted:FIXTURE"),
///   http: {endpoint, model, token_env, retries, retry_backoff_ms,
///          connect_timeout_ms, read_timeout_ms},
///   repetition: {min_parents, jaccard_threshold}
struct ServiceConfig {
  EngineConfig engine;
  RepetitionConfig repetition;
  llm::HttpBackendConfig http;
  std::optional<BackendSpec> backend;
  std::optional<std::filesystem::path> template_dir;
  std::optional<std::filesystem::path> vocabulary;
  std::optional<std::filesystem::path> rules;
  std::optional<std::filesystem::path> typing_scorer;
  std::optional<std::filesystem::path> session_log;

  static ServiceConfig parse(std::string_view json_text,
                             const std::filesystem::path& base_dir = ".");
  static ServiceConfig load(const std::filesystem::path& file);
};

std::shared_ptr<llm::ChatBackend> make_backend(const BackendSpec& spec,
                                               const llm::HttpBackendConfig& http);

llm::TemplateLibrary load_templates(const ServiceConfig& config);

/// Templates, vocabulary, rules (checked against taxonomy) and typing scorer
/// from the config.
WorkbenchOptions make_workbench_options(const ServiceConfig& config, const Taxonomy& taxonomy);

}  // namespace taxwb
