#include "taxwb/llm/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "taxwb/core/error.hpp"

namespace taxwb::llm {
namespace {

struct Attempt {
  ErrorCode failure = ErrorCode::network;
  std::string message;
  bool retryable = true;
};

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::invariant_violation,
                "endpoint '" + config_.endpoint + "' has no scheme");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = config_.endpoint;
    path_ = "/";
  } else {
    scheme_host_port_ = config_.endpoint.substr(0, path_start);
    path_ = config_.endpoint.substr(path_start);
  }
  if (config_.retries < 0) config_.retries = 0;
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

std::string HttpBackend::request_body(const HttpBackendConfig& config,
                                      const ChatRequest& request) {
  std::string content = request.prompt;
  for (const auto& doc : request.attachments) {
    content += "\n\n[" + doc.name + "]\n" + doc.text;
  }
  nlohmann::ordered_json body = {
      {"model", config.model},
      {"messages", nlohmann::ordered_json::array({{{"role", "user"}, {"content", content}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  return body.dump();
}

std::string HttpBackend::reply_text(const std::string& response_body) {
  const auto body = nlohmann::json::parse(response_body, nullptr, false);
  if (body.is_discarded()) throw Error(ErrorCode::parse, "response body is not JSON");
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::parse, "response body lacks choices[0].message.content");
  }
}

std::string HttpBackend::do_complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::milliseconds(config_.connect_timeout_ms));
  client.set_read_timeout(std::chrono::milliseconds(config_.read_timeout_ms));
  client.set_write_timeout(std::chrono::milliseconds(config_.read_timeout_ms));

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const std::string body = request_body(config_, request);

  Attempt last;
  int attempts = 0;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    ++attempts;
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms));
    }
    const auto start = std::chrono::steady_clock::now();
    auto result = client.Post(path_, headers, body, "application/json");
    const auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    last = Attempt{};
    if (!result) {
      const auto err = result.error();
      const bool timed_out =
          err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed_ms >= config_.read_timeout_ms);
      last.failure = timed_out ? ErrorCode::timeout : ErrorCode::network;
      last.message = "POST " + config_.endpoint + " failed: " + httplib::to_string(err);
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last.failure = ErrorCode::http_status;
      last.message = "POST " + config_.endpoint + " returned status " +
                     std::to_string(result->status);
      last.retryable = result->status == 429 || result->status >= 500;
      if (!last.retryable) break;
      continue;
    }
    return reply_text(result->body);
  }
  throw Error(last.failure, last.message + " (after " + std::to_string(attempts) +
                                (attempts == 1 ? " attempt)" : " attempts)"));
}

}  // namespace taxwb::llm
