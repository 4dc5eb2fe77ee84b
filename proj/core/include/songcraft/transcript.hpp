#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "songcraft/chat.hpp"
#include "songcraft/llm_gateway.hpp"
#include "songcraft/session_state.hpp"
#include "songcraft/transitions.hpp"

namespace songcraft::transcript {

inline constexpr std::string_view kTranscriptFormat = "songcraft-transcript/1";

struct SessionHeader {
  std::string session_id;
  std::string user_name;
  std::string library_checksum;
  std::string registry_checksum;
};

/// Record of a committed turn. The opening turn carries the session header.
nlohmann::ordered_json TurnRecord(const ChatTurn& turn, const std::optional<std::string>& prompt_digest,
                                  const SessionHeader* header = nullptr);
nlohmann::ordered_json ExtractionRecord(int turn_index, const StepRef& step, const gateway::ExtractionResult& result,
                                        const std::string& prompt_digest);
nlohmann::ordered_json FailedExtractionRecord(int turn_index, const StepRef& step, const std::string& raw,
                                              const std::string& prompt_digest);
nlohmann::ordered_json TransitionRecord(int turn_index, const StepRef& from, const StepRef& to,
                                        const dialogue::TransitionDecision& decision,
                                        const std::vector<std::string>& actions);

/// One compact JSON record per line.
std::string Export(const SessionState& session);
/// Throws Error(kParse) naming the offending line.
std::vector<nlohmann::json> Parse(std::string_view document);

SessionHeader HeaderOf(const std::vector<nlohmann::json>& records);
/// User turn texts in order.
std::vector<std::string> UserTurns(const std::vector<nlohmann::json>& records);

/// What a transcript says about the end of its session.
struct FinalState {
  std::string status;
  std::string state;
  std::string step;
  std::map<std::string, nlohmann::json> variables;
  std::size_t turns = 0;
  std::size_t lyrics_versions = 0;
  std::size_t songs = 0;
  bool operator==(const FinalState&) const = default;
};

/// Folds records into the final state they imply.
FinalState Fold(const std::vector<nlohmann::json>& records);
FinalState Summarize(const SessionState& session);
/// One line per differing field, e.g. "variables.emotion: expected ... got ...".
std::vector<std::string> Diff(const FinalState& expected, const FinalState& actual);

}  // namespace songcraft::transcript
