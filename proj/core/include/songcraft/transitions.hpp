#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "songcraft/dialogue_state.hpp"
#include "songcraft/session_state.hpp"

namespace songcraft::dialogue {

/// Revision rounds allowed per state before the session moves on regardless.
inline constexpr int kRevisionCap = 3;
/// Consecutive unproductive user turns before the agent re-offers the question.
inline constexpr int kStallLimit = 3;

enum class TransitionKind { kStay, kAdvanceStep, kAdvanceState, kRevertTo, kEndSession };
std::string_view ToString(TransitionKind kind);

struct TransitionDecision {
  TransitionKind kind = TransitionKind::kStay;
  /// Set for kRevertTo.
  std::optional<TherapyState> revert_target;
  /// Step the session moves to; equals the current step for a plain Stay.
  std::string next_step;
  /// Variables reset to Unfilled when the decision is applied.
  std::vector<VariableId> reset_variables;
  std::string reason;
  /// The revision cap overrode a requested revision.
  bool forced = false;

  /// Anything other than a plain Stay changes the session.
  bool changes_session() const { return kind != TransitionKind::kStay || !reset_variables.empty(); }
};

/// Decides where the session goes after the current step's variables were
/// updated. Pure; the session is not modified.
TransitionDecision NextTransition(const Registry& registry, const SessionState& session);

/// Moves the session to the first step of `target` (MakingLyrics or
/// MakingMusic) and resets the variables of that state and every later one.
/// Earlier variables and all artifacts are kept.
SessionState ApplyRevert(const Registry& registry, SessionState session, TherapyState target);

/// Applies any decision returned by NextTransition.
SessionState ApplyDecision(const Registry& registry, SessionState session,
                           const TransitionDecision& decision);

}  // namespace songcraft::dialogue
