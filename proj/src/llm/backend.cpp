#include "taxwb/llm/backend.hpp"

#include <chrono>

#include "taxwb/core/error.hpp"

namespace taxwb::llm {

void validate_request(const ChatRequest& request) {
  if (request.prompt.empty()) {
    throw Error(ErrorCode::invariant_violation, "chat request prompt is empty");
  }
  if (request.max_output_tokens <= 0) {
    throw Error(ErrorCode::invariant_violation, "max_output_tokens must be positive");
  }
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw Error(ErrorCode::invariant_violation, "temperature must lie in [0, 2]");
  }
}

ChatResponse ChatBackend::complete(const ChatRequest& request) {
  validate_request(request);
  const auto start = std::chrono::steady_clock::now();
  ChatResponse response;
  response.text = do_complete(request);
  response.backend_id = id();
  response.latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return response;
}

}  // namespace taxwb::llm
