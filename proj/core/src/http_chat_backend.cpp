#include <httplib.h>

#include <regex>

#include "songcraft/errors.hpp"
#include "songcraft/llm_gateway.hpp"

namespace songcraft::gateway {

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::kConfiguration, "live backend needs an endpoint");
  if (config_.model.empty()) throw Error(ErrorCode::kConfiguration, "live backend needs a model name");
}

std::string HttpChatBackend::Complete(const BackendRequest& request) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw Error(ErrorCode::kConfiguration, "malformed endpoint " + config_.endpoint);
  }
  std::string path = m[2].matched ? m[2].str() : "";
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  httplib::Client client(m[1].str());
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const nlohmann::json body{
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "system"}, {"content", request.prompt_text}}})},
  };
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::kTransport, "chat backend unreachable: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kTransport, "chat backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackend, "chat backend returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBackend, std::string("malformed chat backend reply: ") + e.what());
  }
}

}  // namespace songcraft::gateway
