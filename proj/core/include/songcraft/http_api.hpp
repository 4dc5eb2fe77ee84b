#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "songcraft/errors.hpp"
#include "songcraft/session_service.hpp"

namespace songcraft::api {

inline constexpr int kApiVersion = 1;

struct Request {
  std::string method;
  std::string path;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Routes one request:
///   POST /sessions {userName}            -> 201 snapshot
///   POST /sessions/{id}/turns {text}     -> 200 turn outcome
///   POST /sessions/{id}/end              -> 200 snapshot
///   GET  /sessions/{id}                  -> 200 snapshot
///   GET  /sessions/{id}/songs/{k}/viz    -> 200 VizScript
///   GET  /sessions/{id}/transcript       -> 200 transcript (application/x-ndjson)
///   GET  /healthz                        -> 200
/// Errors use {"error": {"code", "message", "retryable"}}.
Response Handle(SessionService& service, const Request& request);

/// HTTP status for an error code.
int StatusFor(ErrorCode code);

/// Blocking HTTP server over Handle.
class Server {
 public:
  explicit Server(SessionService& service);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int Bind(const std::string& host, int port);
  /// Serves until Stop(); returns false if the listener failed.
  bool Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace songcraft::api
