#include "songcraft/session_store.hpp"

#include <algorithm>
#include <fstream>

#include "songcraft/errors.hpp"

namespace songcraft {

bool IsValidSessionId(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void MemoryStore::Commit(const SessionState& state) {
  auto doc = ToJson(state).dump();
  std::lock_guard lock(mutex_);
  documents_[state.session_id] = std::move(doc);
}

std::optional<SessionState> MemoryStore::Load(std::string_view session_id, const dialogue::Registry& registry) {
  std::string doc;
  {
    std::lock_guard lock(mutex_);
    auto it = documents_.find(session_id);
    if (it == documents_.end()) return std::nullopt;
    doc = it->second;
  }
  return SessionFromJson(nlohmann::ordered_json::parse(doc), registry);
}

std::vector<std::string> MemoryStore::SessionIds() {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, doc] : documents_) ids.push_back(id);
  return ids;
}

FileStore::FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kPersistence, "cannot create store directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path FileStore::PathFor(std::string_view session_id) const {
  if (!IsValidSessionId(session_id)) {
    throw Error(ErrorCode::kContractViolation, "invalid session id '" + std::string(session_id) + "'");
  }
  return dir_ / (std::string(session_id) + ".jsonl");
}

void FileStore::Commit(const SessionState& state) {
  const auto path = PathFor(state.session_id);
  const std::string line = ToJson(state).dump() + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kPersistence, "failed to append to " + path.string());
}

std::optional<SessionState> FileStore::Load(std::string_view session_id, const dialogue::Registry& registry) {
  const auto path = PathFor(session_id);
  std::lock_guard lock(mutex_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::optional<nlohmann::ordered_json> last;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    auto doc = nlohmann::ordered_json::parse(line, nullptr, false);
    if (!doc.is_discarded()) last = std::move(doc);
  }
  if (!last) return std::nullopt;
  return SessionFromJson(*last, registry);
}

std::vector<std::string> FileStore::SessionIds() {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace songcraft
