#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "songcraft/chat.hpp"
#include "songcraft/dialogue_state.hpp"
#include "songcraft/music_pipeline.hpp"
#include "songcraft/viz_compiler.hpp"

namespace songcraft {

enum class SessionStatus { kActive, kEnded };

/// Append-only artifact history; earlier versions are never removed.
struct SessionArtifacts {
  std::vector<music::LyricsDocument> lyrics_versions;
  std::vector<music::StylePrompt> style_prompts;
  std::vector<music::SongArtifact> songs;
  std::vector<viz::VizScript> viz_scripts;
  bool operator==(const SessionArtifacts&) const = default;
};

/// One user's complete therapeutic session.
struct SessionState {
  std::string session_id;
  std::string user_name;
  StepRef current;
  dialogue::RequiredVariableSet vars;
  std::vector<ChatTurn> history;
  SessionArtifacts artifacts;
  std::map<dialogue::TherapyState, int> revision_counts;
  SessionStatus status = SessionStatus::kActive;
  /// Consecutive user turns on the current step that filled nothing.
  int stalled_turns = 0;
  /// Backend calls issued so far; scripted replies are keyed by it.
  std::uint64_t backend_calls = 0;
  /// Set when a crisis-lexicon match was seen; surfaced by the API.
  std::string banner;
  /// Transcript records (line-delimited export), append-only.
  std::vector<nlohmann::ordered_json> records;

  bool operator==(const SessionState&) const = default;
};

std::string_view ToString(SessionStatus status);

nlohmann::ordered_json ToJson(const SessionState& state);
/// Rebuilds a session persisted with ToJson. Variable descriptions and kinds
/// come from `registry`.
SessionState SessionFromJson(const nlohmann::ordered_json& json, const dialogue::Registry& registry);

nlohmann::ordered_json ToJson(const ChatTurn& turn);
ChatTurn ChatTurnFromJson(const nlohmann::json& json);

nlohmann::ordered_json ToJson(const dialogue::RequiredVariableSet& vars);
nlohmann::ordered_json ToJson(const music::LyricsDocument& lyrics);
music::LyricsDocument LyricsFromJson(const nlohmann::json& json);

}  // namespace songcraft
