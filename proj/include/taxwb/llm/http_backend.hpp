#pragma once

#include <string>

#include "taxwb/llm/backend.hpp"

namespace taxwb::llm {

/// OpenAI-style chat completions endpoint.
///
/// Request body:
///   {"model": M, "messages": [{"role": "user", "content": PROMPT}],
///    "temperature": T, "max_tokens": N}
/// Response body: choices[0].message.content is the reply text.
/// Attachments are appended to the user message as named text blocks.
struct HttpBackendConfig {
  std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
  std::string model = "gpt-4-turbo";
  /// Environment variable holding the bearer token; unset means no
  /// Authorization header.
  std::string token_env = "TAXWB_API_TOKEN";
  int retries = 2;
  int retry_backoff_ms = 250;
  int connect_timeout_ms = 5000;
  int read_timeout_ms = 120000;
};

class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override;
  const HttpBackendConfig& config() const noexcept { return config_; }

  static std::string request_body(const HttpBackendConfig& config,
                                  const ChatRequest& request);
  /// Throws Error(parse) when the body lacks choices[0].message.content.
  static std::string reply_text(const std::string& response_body);

 protected:
  std::string do_complete(const ChatRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace taxwb::llm
