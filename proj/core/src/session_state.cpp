#include "songcraft/session_state.hpp"

#include "songcraft/errors.hpp"

namespace songcraft {

namespace {

using nlohmann::ordered_json;

dialogue::TherapyState StateFromJson(const nlohmann::json& j) {
  auto state = dialogue::ParseTherapyState(j.get<std::string>());
  if (!state) throw Error(ErrorCode::kParse, "unknown therapy state " + j.dump());
  return *state;
}

music::SectionKind SectionFromString(const std::string& s) {
  if (s == "Verse") return music::SectionKind::kVerse;
  if (s == "Chorus") return music::SectionKind::kChorus;
  if (s == "Bridge") return music::SectionKind::kBridge;
  throw Error(ErrorCode::kParse, "unknown lyrics section " + s);
}

}  // namespace

std::string_view ToString(Speaker speaker) { return speaker == Speaker::kUser ? "user" : "agent"; }

std::string_view ToString(SessionStatus status) {
  return status == SessionStatus::kActive ? "active" : "ended";
}

ordered_json ToJson(const ChatTurn& turn) {
  ordered_json j;
  j["index"] = turn.index;
  j["speaker"] = ToString(turn.speaker);
  j["text"] = turn.text;
  j["optionChips"] = turn.option_chips;
  j["state"] = dialogue::ToString(turn.state_at.state);
  j["step"] = turn.state_at.step;
  j["crisisFlag"] = turn.crisis_flagged;
  j["pendingRetry"] = turn.pending_retry;
  return j;
}

ChatTurn ChatTurnFromJson(const nlohmann::json& j) {
  ChatTurn turn;
  turn.index = j.at("index").get<int>();
  turn.speaker = j.at("speaker").get<std::string>() == "user" ? Speaker::kUser : Speaker::kAgent;
  turn.text = j.at("text").get<std::string>();
  turn.option_chips = j.value("optionChips", std::vector<std::string>{});
  turn.state_at = {StateFromJson(j.at("state")), j.at("step").get<std::string>()};
  turn.crisis_flagged = j.value("crisisFlag", false);
  turn.pending_retry = j.value("pendingRetry", false);
  return turn;
}

ordered_json ToJson(const dialogue::RequiredVariableSet& vars) {
  ordered_json j = ordered_json::object();
  for (const auto& [id, entry] : vars.entries()) {
    ordered_json e;
    e["status"] = entry.filled() ? "filled" : "unfilled";
    e["value"] = entry.value ? dialogue::ValueToJson(*entry.value) : ordered_json(nullptr);
    e["filledAtTurn"] = entry.filled_at_turn ? ordered_json(*entry.filled_at_turn) : ordered_json(nullptr);
    j[id] = std::move(e);
  }
  return j;
}

ordered_json ToJson(const music::LyricsDocument& lyrics) {
  ordered_json sections = ordered_json::array();
  for (const auto& s : lyrics.sections) {
    sections.push_back({{"kind", music::ToString(s.kind)}, {"lines", s.lines}});
  }
  return {{"sections", std::move(sections)}, {"fullText", lyrics.full_text}};
}

music::LyricsDocument LyricsFromJson(const nlohmann::json& j) {
  music::LyricsDocument doc;
  for (const auto& s : j.at("sections")) {
    doc.sections.push_back({SectionFromString(s.at("kind").get<std::string>()),
                            s.at("lines").get<std::vector<std::string>>()});
  }
  doc.full_text = j.at("fullText").get<std::string>();
  return doc;
}

ordered_json ToJson(const SessionState& state) {
  ordered_json j;
  j["sessionId"] = state.session_id;
  j["userName"] = state.user_name;
  j["status"] = ToString(state.status);
  j["state"] = dialogue::ToString(state.current.state);
  j["step"] = state.current.step;
  j["variables"] = ToJson(state.vars);
  auto& history = j["history"] = ordered_json::array();
  for (const auto& turn : state.history) history.push_back(ToJson(turn));

  ordered_json artifacts;
  auto& lyrics = artifacts["lyricsVersions"] = ordered_json::array();
  for (const auto& l : state.artifacts.lyrics_versions) lyrics.push_back(ToJson(l));
  auto& styles = artifacts["stylePrompts"] = ordered_json::array();
  for (const auto& s : state.artifacts.style_prompts) {
    styles.push_back({{"keywords", s.keywords}, {"renderedText", s.rendered_text}});
  }
  auto& songs = artifacts["songs"] = ordered_json::array();
  for (const auto& s : state.artifacts.songs) {
    songs.push_back({{"songId", s.song_id},
                     {"audioRef", s.audio_ref},
                     {"durationMs", s.duration_ms},
                     {"styleEcho", s.style_echo}});
  }
  auto& scripts = artifacts["vizScripts"] = ordered_json::array();
  for (const auto& v : state.artifacts.viz_scripts) scripts.push_back(viz::SerializeScript(v));
  j["artifacts"] = std::move(artifacts);

  ordered_json revisions = ordered_json::object();
  for (const auto& [s, count] : state.revision_counts) revisions[std::string(dialogue::ToString(s))] = count;
  j["revisionCounts"] = std::move(revisions);
  j["stalledTurns"] = state.stalled_turns;
  j["backendCalls"] = state.backend_calls;
  j["banner"] = state.banner;
  j["records"] = state.records;
  return j;
}

SessionState SessionFromJson(const nlohmann::ordered_json& doc, const dialogue::Registry& registry) {
  SessionState state;
  try {
    const nlohmann::json j(doc);
    state.session_id = j.at("sessionId").get<std::string>();
    state.user_name = j.at("userName").get<std::string>();
    state.status = j.at("status").get<std::string>() == "ended" ? SessionStatus::kEnded : SessionStatus::kActive;
    state.current = {StateFromJson(j.at("state")), j.at("step").get<std::string>()};
    state.vars = registry.EmptyVariableSet();
    for (const auto& [id, e] : j.at("variables").items()) {
      if (e.at("status").get<std::string>() != "filled") continue;
      auto value = dialogue::ValueFromJson(registry.Variable(id).kind, e.at("value"));
      if (!value) throw Error(ErrorCode::kParse, "variable " + id + " has a malformed value");
      state.vars.Fill(id, std::move(*value), e.at("filledAtTurn").get<int>());
    }
    for (const auto& t : j.at("history")) state.history.push_back(ChatTurnFromJson(t));

    const auto& a = j.at("artifacts");
    for (const auto& l : a.at("lyricsVersions")) state.artifacts.lyrics_versions.push_back(LyricsFromJson(l));
    for (const auto& s : a.at("stylePrompts")) {
      state.artifacts.style_prompts.push_back(
          {s.at("keywords").get<std::vector<std::string>>(), s.at("renderedText").get<std::string>()});
    }
    for (const auto& s : a.at("songs")) {
      state.artifacts.songs.push_back({s.at("songId").get<std::string>(), s.at("audioRef").get<std::string>(),
                                       s.at("durationMs").get<std::int64_t>(),
                                       s.at("styleEcho").get<std::string>()});
    }
    for (const auto& v : a.at("vizScripts")) state.artifacts.viz_scripts.push_back(viz::ParseScript(v.get<std::string>()));

    for (const auto& [name, count] : j.at("revisionCounts").items()) {
      auto s = dialogue::ParseTherapyState(name);
      if (!s) throw Error(ErrorCode::kParse, "unknown therapy state " + name);
      state.revision_counts[*s] = count.get<int>();
    }
    state.stalled_turns = j.at("stalledTurns").get<int>();
    state.backend_calls = j.at("backendCalls").get<std::uint64_t>();
    state.banner = j.at("banner").get<std::string>();
    for (const auto& r : doc.at("records")) state.records.push_back(r);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("session document: ") + e.what());
  }
  return state;
}

}  // namespace songcraft
