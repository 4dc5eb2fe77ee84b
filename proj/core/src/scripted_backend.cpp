#include <fstream>

#include "songcraft/errors.hpp"
#include "songcraft/llm_gateway.hpp"

namespace songcraft::gateway {

namespace {

prompt::PromptKind KindFromString(const std::string& s) {
  if (s == "dialogue") return prompt::PromptKind::kDialogue;
  if (s == "extraction") return prompt::PromptKind::kExtraction;
  if (s == "generation") return prompt::PromptKind::kGeneration;
  throw Error(ErrorCode::kParse, "replay script: unknown kind " + s);
}

std::vector<std::string> ChangedSections(const std::map<std::string, std::string>& pinned,
                                         const std::map<std::string, std::string>& actual) {
  std::vector<std::string> changed;
  for (const auto& [id, digest] : actual) {
    auto it = pinned.find(id);
    if (it == pinned.end() || it->second != digest) changed.push_back(id);
  }
  for (const auto& [id, digest] : pinned) {
    if (!actual.count(id)) changed.push_back(id);
  }
  return changed;
}

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

ReplayScript ReplayScript::FromJson(const nlohmann::json& document) {
  ReplayScript script;
  try {
    if (document.value("format", "") != kReplayScriptFormat) {
      throw Error(ErrorCode::kParse, "replay script: format is not songcraft-replay-script");
    }
    if (document.at("version").get<int>() != kReplayScriptVersion) {
      throw Error(ErrorCode::kParse, "replay script: unsupported version");
    }
    std::size_t n = 0;
    for (const auto& e : document.at("entries")) {
      ScriptEntry entry;
      if (e.contains("call")) entry.call = e["call"].get<std::uint64_t>();
      entry.kind = KindFromString(e.value("kind", "dialogue"));
      const auto& reply = e.at("reply");
      entry.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
      if (e.contains("digest")) entry.digest = e["digest"].get<std::string>();
      if (e.contains("sections")) entry.sections = e["sections"].get<std::map<std::string, std::string>>();
      if (!entry.call && !entry.digest) {
        throw Error(ErrorCode::kParse, "replay script: entry " + std::to_string(n) + " has neither call nor digest");
      }
      script.entries.push_back(std::move(entry));
      ++n;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("replay script: ") + e.what());
  }
  return script;
}

ReplayScript ReplayScript::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open replay script " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return FromJson(doc);
}

nlohmann::ordered_json ReplayScript::ToJson() const {
  nlohmann::ordered_json doc;
  doc["format"] = kReplayScriptFormat;
  doc["version"] = kReplayScriptVersion;
  auto& list = doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    if (e.call) j["call"] = *e.call;
    j["kind"] = prompt::ToString(e.kind);
    j["reply"] = e.reply;
    if (e.digest) j["digest"] = *e.digest;
    if (!e.sections.empty()) j["sections"] = e.sections;
    list.push_back(std::move(j));
  }
  return doc;
}

ScriptedBackend::ScriptedBackend(ReplayScript script) : script_(std::move(script)) {
  for (std::size_t i = 0; i < script_.entries.size(); ++i) {
    const auto& e = script_.entries[i];
    if (e.call) by_call_.emplace(*e.call, i);
    else by_digest_.emplace(*e.digest, i);
  }
}

std::string ScriptedBackend::Complete(const BackendRequest& request) {
  if (auto it = by_digest_.find(request.digest); it != by_digest_.end()) {
    return script_.entries[it->second].reply;
  }
  const std::string where = "call " + std::to_string(request.call_index);
  auto it = by_call_.find(request.call_index);
  if (it == by_call_.end()) {
    throw ScriptedMiss("no scripted reply for " + where + " (" + std::string(prompt::ToString(request.kind)) +
                           ", digest " + request.digest + ")",
                       request.digest, {});
  }
  const auto& entry = script_.entries[it->second];
  if (entry.kind != request.kind) {
    throw ScriptedMiss(where + " is scripted as " + std::string(prompt::ToString(entry.kind)) + " but the request is " +
                           std::string(prompt::ToString(request.kind)),
                       request.digest, {});
  }
  if (entry.digest && *entry.digest != request.digest) {
    auto changed = ChangedSections(entry.sections, request.section_digests);
    const std::string message = where + ": prompt digest " + request.digest +
                                " differs from the pinned one; changed sections: " +
                                (changed.empty() ? std::string("unknown") : Join(changed));
    throw ScriptedMiss(message, request.digest, std::move(changed));
  }
  return entry.reply;
}

std::string RecordingBackend::Complete(const BackendRequest& request) {
  std::string reply = inner_.Complete(request);
  std::lock_guard lock(mutex_);
  script_.entries.push_back({request.call_index, request.kind, reply, request.digest, request.section_digests});
  return reply;
}

ReplayScript RecordingBackend::script() const {
  std::lock_guard lock(mutex_);
  return script_;
}

}  // namespace songcraft::gateway
