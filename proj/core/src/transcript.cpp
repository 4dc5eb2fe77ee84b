#include "songcraft/transcript.hpp"

#include "songcraft/errors.hpp"

namespace songcraft::transcript {

namespace {

using nlohmann::ordered_json;

ordered_json StepJson(const StepRef& ref) {
  return {{"state", dialogue::ToString(ref.state)}, {"step", ref.step}};
}

std::string Show(const nlohmann::json& j) { return j.is_null() ? "(absent)" : j.dump(); }

}  // namespace

ordered_json TurnRecord(const ChatTurn& turn, const std::optional<std::string>& prompt_digest,
                        const SessionHeader* header) {
  ordered_json r;
  r["type"] = "turn";
  if (header) {
    r["format"] = kTranscriptFormat;
    r["sessionId"] = header->session_id;
    r["userName"] = header->user_name;
    r["libraryChecksum"] = header->library_checksum;
    r["registryChecksum"] = header->registry_checksum;
  }
  r["index"] = turn.index;
  r["speaker"] = ToString(turn.speaker);
  r["text"] = turn.text;
  r["optionChips"] = turn.option_chips;
  r["state"] = dialogue::ToString(turn.state_at.state);
  r["step"] = turn.state_at.step;
  r["crisisFlag"] = turn.crisis_flagged;
  if (prompt_digest) r["promptDigest"] = *prompt_digest;
  return r;
}

ordered_json ExtractionRecord(int turn_index, const StepRef& step, const gateway::ExtractionResult& result,
                              const std::string& prompt_digest) {
  ordered_json r;
  r["type"] = "extraction";
  r["turn"] = turn_index;
  r.update(StepJson(step));
  ordered_json values = ordered_json::object();
  for (const auto& [id, value] : result.values) values[id] = dialogue::ValueToJson(value);
  r["values"] = std::move(values);
  r["warnings"] = result.warnings;
  r["promptDigest"] = prompt_digest;
  return r;
}

ordered_json FailedExtractionRecord(int turn_index, const StepRef& step, const std::string& raw,
                                    const std::string& prompt_digest) {
  ordered_json r;
  r["type"] = "extraction";
  r["turn"] = turn_index;
  r.update(StepJson(step));
  r["failed"] = true;
  r["values"] = ordered_json::object();
  r["rawBackendText"] = raw;
  r["promptDigest"] = prompt_digest;
  return r;
}

ordered_json TransitionRecord(int turn_index, const StepRef& from, const StepRef& to,
                              const dialogue::TransitionDecision& decision, const std::vector<std::string>& actions) {
  ordered_json r;
  r["type"] = "transition";
  r["turn"] = turn_index;
  r["kind"] = dialogue::ToString(decision.kind);
  r["from"] = StepJson(from);
  r["to"] = StepJson(to);
  r["resetVariables"] = decision.reset_variables;
  r["actions"] = actions;
  r["reason"] = decision.reason;
  r["forced"] = decision.forced;
  return r;
}

std::string Export(const SessionState& session) {
  std::string out;
  for (const auto& r : session.records) out += r.dump() + "\n";
  return out;
}

std::vector<nlohmann::json> Parse(std::string_view document) {
  std::vector<nlohmann::json> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < document.size()) {
    auto nl = document.find('\n', start);
    if (nl == std::string_view::npos) nl = document.size();
    ++line_no;
    const auto line = document.substr(start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
      throw Error(ErrorCode::kParse, "transcript line " + std::to_string(line_no) + ": not a record");
    }
    records.push_back(std::move(j));
  }
  if (records.empty() || records.front().value("type", "") != "turn" || !records.front().contains("sessionId")) {
    throw Error(ErrorCode::kParse, "transcript line 1: missing opening turn record");
  }
  return records;
}

SessionHeader HeaderOf(const std::vector<nlohmann::json>& records) {
  if (records.empty()) throw Error(ErrorCode::kParse, "empty transcript");
  const auto& r = records.front();
  try {
    return {r.at("sessionId").get<std::string>(), r.at("userName").get<std::string>(),
            r.value("libraryChecksum", ""), r.value("registryChecksum", "")};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transcript line 1: ") + e.what());
  }
}

std::vector<std::string> UserTurns(const std::vector<nlohmann::json>& records) {
  std::vector<std::string> texts;
  for (const auto& r : records) {
    if (r.value("type", "") == "turn" && r.value("speaker", "") == "user") texts.push_back(r.value("text", ""));
  }
  return texts;
}

FinalState Fold(const std::vector<nlohmann::json>& records) {
  FinalState s;
  s.status = "active";
  try {
    for (const auto& r : records) {
      const auto type = r.at("type").get<std::string>();
      if (type == "turn") {
        ++s.turns;
        if (s.state.empty()) {
          s.state = r.at("state").get<std::string>();
          s.step = r.at("step").get<std::string>();
        }
      } else if (type == "extraction") {
        for (const auto& [id, value] : r.at("values").items()) s.variables[id] = value;
      } else if (type == "transition") {
        for (const auto& id : r.at("resetVariables")) s.variables.erase(id.get<std::string>());
        s.state = r.at("to").at("state").get<std::string>();
        s.step = r.at("to").at("step").get<std::string>();
        for (const auto& action : r.at("actions")) {
          if (action == dialogue::kGenerateLyrics) ++s.lyrics_versions;
          if (action == dialogue::kGenerateMusic) ++s.songs;
        }
        if (r.at("kind") == "EndSession") s.status = "ended";
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transcript record: ") + e.what());
  }
  return s;
}

FinalState Summarize(const SessionState& session) {
  FinalState s;
  s.status = ToString(session.status);
  s.state = dialogue::ToString(session.current.state);
  s.step = session.current.step;
  for (const auto& [id, entry] : session.vars.entries()) {
    if (entry.filled()) s.variables[id] = dialogue::ValueToJson(*entry.value);
  }
  for (const auto& turn : session.history) {
    if (!turn.pending_retry) ++s.turns;
  }
  s.lyrics_versions = session.artifacts.lyrics_versions.size();
  s.songs = session.artifacts.songs.size();
  return s;
}

std::vector<std::string> Diff(const FinalState& expected, const FinalState& actual) {
  std::vector<std::string> out;
  auto field = [&](const std::string& name, const auto& e, const auto& a) {
    if (e != a) out.push_back(name + ": expected " + nlohmann::json(e).dump() + " got " + nlohmann::json(a).dump());
  };
  field("status", expected.status, actual.status);
  field("state", expected.state, actual.state);
  field("step", expected.step, actual.step);
  field("turns", expected.turns, actual.turns);
  field("lyricsVersions", expected.lyrics_versions, actual.lyrics_versions);
  field("songs", expected.songs, actual.songs);
  std::map<std::string, std::pair<nlohmann::json, nlohmann::json>> vars;
  for (const auto& [id, v] : expected.variables) vars[id].first = v;
  for (const auto& [id, v] : actual.variables) vars[id].second = v;
  for (const auto& [id, pair] : vars) {
    if (pair.first != pair.second) {
      out.push_back("variables." + id + ": expected " + Show(pair.first) + " got " + Show(pair.second));
    }
  }
  return out;
}

}  // namespace songcraft::transcript
