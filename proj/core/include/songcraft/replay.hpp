#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "songcraft/llm_gateway.hpp"
#include "songcraft/session_service.hpp"
#include "songcraft/transcript.hpp"

namespace songcraft::replay {

struct Report {
  /// True iff the replayed session ends in the transcript's final state.
  bool matches = false;
  std::vector<std::string> diffs;
  /// Set when the replay stopped early (scripted miss, backend error).
  std::string error;
  /// 0-based index of the user turn that failed, or -1.
  int failed_turn = -1;
  std::vector<std::string> notes;
  SessionState final_state;
};

/// Re-runs the user turns of `transcript_text` against a scripted backend
/// built from `script` and compares the outcome with the recorded final
/// state. Throws Error(kParse) when the transcript is malformed. Backends in
/// `context` other than chat (music, analysis) must be set; the chat
/// backend is replaced.
Report Run(std::string_view transcript_text, const gateway::ReplayScript& script, ServiceContext context);

/// Human-readable report; the last line is "MATCH" or "MISMATCH".
std::string Format(const Report& report);

}  // namespace songcraft::replay
