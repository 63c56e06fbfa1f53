#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "taxwb/core/error.hpp"
#include "taxwb/service/workbench.hpp"

namespace httplib {
class Server;
}

namespace taxwb {

/// 404 for unknown paths, proposals and rules; 409 for version and state
/// conflicts; 502 for backend failures; 500 for I/O; 400 otherwise.
int http_status_for(ErrorCode code) noexcept;

/// Accepts 7, "7" and W/"7". Throws Error(parse) for anything else.
std::uint64_t parse_if_match(std::string_view header);

/// JSON API over a Workbench:
///   GET  /taxonomy                      canonical document (ETag: version)
///   GET  /subtree?path=P                {path, version, branch}
///   GET  /stats                         {version, node_count, ...}
///   GET  /search?label=L                {label, paths}
///   POST /expansions                    {mode, path|label, instructions} -> 201 proposal
///   GET  /expansions                    proposal summaries
///   GET  /expansions/{id}               {proposal, current, diff}
///   POST /expansions/{id}/decision      {decision, override?}
///   GET  /combinations                  rules
///   POST /combinations/expand           {rule, materialize?}
///   GET  /repetition                    repetition report
///   POST /typing                        {sentence, span, beam_width, ...}
/// Mutating requests may carry If-Match: version; a conflicting subtree
/// yields 409. Errors are {"error": code, "message": text}.
class ApiServer {
 public:
  explicit ApiServer(Workbench& workbench);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires bind().
  void listen();
  /// bind() then listen() on a background thread.
  int start(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }

 private:
  void install_routes();

  Workbench& workbench_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace taxwb
