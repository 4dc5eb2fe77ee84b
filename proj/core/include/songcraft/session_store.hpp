#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "songcraft/dialogue_state.hpp"
#include "songcraft/session_state.hpp"

namespace songcraft {

/// Durable session snapshots. Commit is all-or-nothing per call.
class SessionStore {
 public:
  virtual ~SessionStore() = default;
  /// Throws Error(kPersistence) when the snapshot could not be written.
  virtual void Commit(const SessionState& state) = 0;
  virtual std::optional<SessionState> Load(std::string_view session_id, const dialogue::Registry& registry) = 0;
  virtual std::vector<std::string> SessionIds() = 0;
};

class MemoryStore : public SessionStore {
 public:
  void Commit(const SessionState& state) override;
  std::optional<SessionState> Load(std::string_view session_id, const dialogue::Registry& registry) override;
  std::vector<std::string> SessionIds() override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::string, std::less<>> documents_;
};

/// One append-only log per session (`<dir>/<id>.jsonl`), one snapshot per
/// line. The last complete line wins; a torn trailing line is ignored.
class FileStore : public SessionStore {
 public:
  explicit FileStore(std::filesystem::path dir);
  void Commit(const SessionState& state) override;
  std::optional<SessionState> Load(std::string_view session_id, const dialogue::Registry& registry) override;
  std::vector<std::string> SessionIds() override;

 private:
  std::filesystem::path PathFor(std::string_view session_id) const;

  std::filesystem::path dir_;
  std::mutex mutex_;
};

/// Session ids are 1-64 characters from [A-Za-z0-9_-].
bool IsValidSessionId(std::string_view id);

}  // namespace songcraft
