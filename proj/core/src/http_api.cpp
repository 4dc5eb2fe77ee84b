#include "songcraft/http_api.hpp"

#include <httplib.h>

#include <regex>

#include "songcraft/errors.hpp"

namespace songcraft::api {

namespace {

Response Json(int status, const nlohmann::ordered_json& body) { return {status, "application/json", body.dump(2)}; }

Response ErrorResponse(ErrorCode code, const std::string& message, bool retryable) {
  nlohmann::ordered_json body;
  body["error"] = {{"code", ToString(code)}, {"message", message}, {"retryable", retryable}};
  return Json(StatusFor(code), body);
}

std::string BodyField(const std::string& body, const char* field) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::kParse, "request body is not a JSON object");
  const auto it = doc.find(field);
  if (it == doc.end() || !it->is_string()) {
    throw Error(ErrorCode::kParse, std::string("request body needs a string field \"") + field + "\"");
  }
  return it->get<std::string>();
}

nlohmann::ordered_json OutcomeView(const TurnOutcome& outcome, const dialogue::Registry& registry) {
  nlohmann::ordered_json view;
  view["agentTurn"] = ToJson(outcome.agent_turn);
  view["transition"] = {{"kind", dialogue::ToString(outcome.decision.kind)},
                        {"reason", outcome.decision.reason},
                        {"forced", outcome.decision.forced}};
  view["session"] = SnapshotView(outcome.snapshot, registry);
  view["warnings"] = outcome.warnings;
  return view;
}

Response Route(SessionService& service, const Request& req) {
  static const std::regex session_re(R"(^/sessions/([^/]+)$)");
  static const std::regex turns_re(R"(^/sessions/([^/]+)/turns$)");
  static const std::regex end_re(R"(^/sessions/([^/]+)/end$)");
  static const std::regex viz_re(R"(^/sessions/([^/]+)/songs/(\d{1,9})/viz$)");
  static const std::regex transcript_re(R"(^/sessions/([^/]+)/transcript$)");
  const auto& registry = *service.context().registry;
  std::smatch m;
  const std::string& path = req.path;

  if (path == "/healthz") {
    if (req.method != "GET") return ErrorResponse(ErrorCode::kNotFound, "method not allowed", false);
    return Json(200, {{"status", "ok"}, {"apiVersion", kApiVersion}});
  }
  if (path == "/sessions" && req.method == "POST") {
    const auto state = service.CreateSession(BodyField(req.body, "userName"));
    return Json(201, SnapshotView(state, registry));
  }
  if (req.method == "POST" && std::regex_match(path, m, turns_re)) {
    const auto outcome = service.ProcessUserTurn(m[1].str(), BodyField(req.body, "text"));
    return Json(200, OutcomeView(outcome, registry));
  }
  if (req.method == "POST" && std::regex_match(path, m, end_re)) {
    return Json(200, SnapshotView(service.EndSession(m[1].str()), registry));
  }
  if (req.method == "GET" && std::regex_match(path, m, session_re)) {
    return Json(200, SnapshotView(service.Snapshot(m[1].str()), registry));
  }
  if (req.method == "GET" && std::regex_match(path, m, viz_re)) {
    return {200, "application/json", service.VizScript(m[1].str(), std::stoul(m[2].str()))};
  }
  if (req.method == "GET" && std::regex_match(path, m, transcript_re)) {
    return {200, "application/x-ndjson", service.ExportTranscript(m[1].str())};
  }
  return ErrorResponse(ErrorCode::kNotFound, "no route for " + req.method + " " + path, false);
}

}  // namespace

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kBusy:
    case ErrorCode::kSessionEnded: return 409;
    case ErrorCode::kContractViolation:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kTransport: return 503;
    case ErrorCode::kBackend:
    case ErrorCode::kScriptedMiss:
    case ErrorCode::kInvalidArtifact:
    case ErrorCode::kFeatureInvalid:
    case ErrorCode::kLyricsFormat:
    case ErrorCode::kDegenerateTiming:
    case ErrorCode::kExtractionFailed:
    case ErrorCode::kIncompleteComponents: return 502;
    default: return 500;
  }
}

Response Handle(SessionService& service, const Request& request) {
  try {
    return Route(service, request);
  } catch (const Error& e) {
    return ErrorResponse(e.code(), e.what(), e.retryable() || e.code() == ErrorCode::kBusy);
  } catch (const std::exception& e) {
    return ErrorResponse(ErrorCode::kContractViolation, e.what(), false);
  }
}

struct Server::Impl {
  explicit Impl(SessionService& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const auto out = Handle(service, {req.method, req.path, req.body});
      res.status = out.status;
      res.set_header("X-Songcraft-Api", std::to_string(kApiVersion));
      res.set_content(out.body, out.content_type);
    };
    const std::string any = ".*";
    server.Get(any, handler);
    server.Post(any, handler);
  }
  SessionService& service;
  httplib::Server server;
};

Server::Server(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}
Server::~Server() = default;

int Server::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Server::Run() { return impl_->server.listen_after_bind(); }
void Server::Stop() { impl_->server.stop(); }

}  // namespace songcraft::api
