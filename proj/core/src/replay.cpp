#include "songcraft/replay.hpp"

#include "songcraft/errors.hpp"

namespace songcraft::replay {

Report Run(std::string_view transcript_text, const gateway::ReplayScript& script, ServiceContext context) {
  const auto records = transcript::Parse(transcript_text);
  const auto header = transcript::HeaderOf(records);
  const auto expected = transcript::Fold(records);

  Report report;
  if (!header.library_checksum.empty() && header.library_checksum != context.library->checksum()) {
    report.notes.push_back("prompt library checksum differs from the one recorded in the transcript");
  }
  gateway::ScriptedBackend backend(script);
  context.chat = &backend;
  context.gateway_options.base_backoff = std::chrono::milliseconds(0);
  MemoryStore store;
  SessionService service(std::move(context), store);

  try {
    service.CreateSession(header.user_name, header.session_id);
  } catch (const Error& e) {
    report.error = std::string("opening turn: ") + e.what();
    return report;
  }
  const auto turns = transcript::UserTurns(records);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    try {
      service.ProcessUserTurn(header.session_id, turns[i]);
    } catch (const Error& e) {
      report.failed_turn = static_cast<int>(i);
      report.error = "user turn " + std::to_string(i) + ": " + e.what();
      break;
    }
  }
  report.final_state = service.Snapshot(header.session_id);
  const auto actual = transcript::Summarize(report.final_state);
  report.diffs = transcript::Diff(expected, actual);
  report.matches = report.error.empty() && report.diffs.empty();
  return report;
}

std::string Format(const Report& report) {
  std::string out;
  for (const auto& note : report.notes) out += "note: " + note + "\n";
  if (!report.error.empty()) out += "error: " + report.error + "\n";
  for (const auto& diff : report.diffs) out += "diff: " + diff + "\n";
  out += report.matches ? "MATCH\n" : "MISMATCH\n";
  return out;
}

}  // namespace songcraft::replay
