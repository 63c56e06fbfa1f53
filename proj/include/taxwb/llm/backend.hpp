#pragma once

#include <string>
#include <vector>

#include "taxwb/llm/prompt.hpp"

namespace taxwb::llm {

struct ChatRequest {
  std::string prompt;
  std::vector<GroundingDocument> attachments;
  int max_output_tokens = 4096;
  double temperature = 0.0;
};

struct ChatResponse {
  std::string text;
  std::string backend_id;
  double latency_ms = 0.0;
};

/// Single-turn chat completion. Implementations must tolerate concurrent
/// calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  virtual std::string id() const = 0;

  /// Validates the request, forwards it, and stamps backend id and latency.
  /// Throws Error(invariant_violation) on an invalid request before any I/O;
  /// backend failures surface as fixture_miss, network, http_status or
  /// timeout.
  ChatResponse complete(const ChatRequest& request);

 protected:
  virtual std::string do_complete(const ChatRequest& request) = 0;
};

void validate_request(const ChatRequest& request);

}  // namespace taxwb::llm
