#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "songcraft/dialogue_state.hpp"
#include "songcraft/llm_gateway.hpp"
#include "songcraft/music_pipeline.hpp"
#include "songcraft/prompt_engine.hpp"
#include "songcraft/session_state.hpp"
#include "songcraft/session_store.hpp"
#include "songcraft/transitions.hpp"
#include "songcraft/viz_compiler.hpp"

namespace songcraft {

inline constexpr std::string_view kCrisisBanner =
    "Crisis language was detected in this conversation. If you are in danger, please contact a professional or "
    "emergency service now.";

/// Everything a session service needs besides its store.
struct ServiceContext {
  const dialogue::Registry* registry = &dialogue::Registry::Default();
  const prompt::PromptLibrary* library = &prompt::PromptLibrary::Default();
  const viz::MoodStyleTable* moods = &viz::MoodStyleTable::Default();
  gateway::ChatBackend* chat = nullptr;
  music::MusicBackend* music = nullptr;
  music::AnalysisBackend* analysis = nullptr;
  gateway::GatewayOptions gateway_options;
  std::size_t turn_budget = prompt::kDefaultTurnBudget;
  /// Produces new session ids; random 128-bit hex when empty.
  std::function<std::string()> id_generator;
};

struct TurnOutcome {
  ChatTurn agent_turn;
  dialogue::TransitionDecision decision;
  SessionState snapshot;
  std::vector<std::string> warnings;
};

/// Runs therapeutic songwriting sessions. Turns on one session are strictly
/// serialized (a concurrent caller gets Error(kBusy)); different sessions
/// proceed independently. Readers only ever see committed snapshots.
class SessionService {
 public:
  SessionService(ServiceContext context, SessionStore& store);

  /// Starts a session with the agent's opening turn. Throws
  /// Error(kContractViolation) for a blank name.
  SessionState CreateSession(std::string_view user_name, std::optional<std::string> session_id = std::nullopt);

  /// One full turn: extraction, transition, system actions, agent reply,
  /// commit. On a backend failure the committed state becomes the pre-turn
  /// snapshot plus the user turn marked pending_retry, and the error is
  /// rethrown. Retrying replaces the pending turn.
  TurnOutcome ProcessUserTurn(std::string_view session_id, std::string_view text);

  /// Ends the session at the user's request.
  SessionState EndSession(std::string_view session_id);

  /// Latest committed snapshot. Throws Error(kNotFound).
  SessionState Snapshot(std::string_view session_id);
  /// Canonical VizScript of song `index`. Throws Error(kNotFound).
  std::string VizScript(std::string_view session_id, std::size_t index);
  std::string ExportTranscript(std::string_view session_id);

  const ServiceContext& context() const { return context_; }

 private:
  struct Slot {
    std::mutex turn_mutex;
    std::mutex snapshot_mutex;
    SessionState committed;
  };

  std::shared_ptr<Slot> Find(std::string_view session_id);
  SessionState Read(Slot& slot);
  void Publish(Slot& slot, SessionState state);
  void RunTurn(SessionState& work, const std::string& text, TurnOutcome& outcome);
  void GenerateLyrics(SessionState& work);
  void GenerateSong(SessionState& work);
  ChatTurn AgentReply(SessionState& work, const std::vector<std::string>& notices, std::vector<std::string>* warnings,
                      std::string* digest);
  std::string NewId();

  ServiceContext context_;
  SessionStore& store_;
  gateway::Gateway gateway_;
  std::string registry_checksum_;
  std::mutex slots_mutex_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> slots_;
};

/// JSON view served by GET /sessions/{id}.
nlohmann::ordered_json SnapshotView(const SessionState& session, const dialogue::Registry& registry);

}  // namespace songcraft
