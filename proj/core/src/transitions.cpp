#include "songcraft/transitions.hpp"

#include "songcraft/errors.hpp"

namespace songcraft::dialogue {

namespace {

std::vector<VariableId> VariablesFromStateOnward(const Registry& registry, TherapyState target) {
  std::vector<VariableId> out;
  for (const auto& step : registry.steps()) {
    if (Ordinal(step.state) < Ordinal(target)) continue;
    out.insert(out.end(), step.required_variables.begin(), step.required_variables.end());
  }
  return out;
}

int RevisionCount(const SessionState& session, TherapyState state) {
  auto it = session.revision_counts.find(state);
  return it == session.revision_counts.end() ? 0 : it->second;
}

TransitionDecision Forward(const Registry& registry, const TherapyStep& step, std::string reason) {
  TransitionDecision d;
  if (step.name == kSelfExplorationStep) {
    d.kind = TransitionKind::kEndSession;
    d.next_step = step.name;
  } else if (const TherapyStep* next = registry.NextStepInState(step)) {
    d.kind = TransitionKind::kAdvanceStep;
    d.next_step = next->name;
  } else {
    d.kind = TransitionKind::kAdvanceState;
    d.next_step = registry.steps().at(static_cast<std::size_t>(registry.GlobalIndex(step) + 1)).name;
  }
  d.reason = std::move(reason);
  return d;
}

}  // namespace

std::string_view ToString(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::kStay: return "Stay";
    case TransitionKind::kAdvanceStep: return "AdvanceStep";
    case TransitionKind::kAdvanceState: return "AdvanceState";
    case TransitionKind::kRevertTo: return "RevertTo";
    case TransitionKind::kEndSession: return "EndSession";
  }
  return "Stay";
}

TransitionDecision NextTransition(const Registry& registry, const SessionState& session) {
  const TherapyStep& step = registry.Step(session.current.step);
  TransitionDecision stay;
  stay.next_step = step.name;

  if (session.status == SessionStatus::kEnded) {
    stay.reason = "session has ended";
    return stay;
  }
  if (!CheckStepComplete(step, session.vars)) {
    stay.reason = "waiting for:";
    for (const auto& id : step.required_variables) {
      if (!session.vars.IsFilled(id)) stay.reason += " " + id;
    }
    return stay;
  }

  if (step.name == kLyricsDiscussionStep) {
    const auto& flag = std::get<LyricsFlag>(*session.vars.at(kLyricsFlagVar).value);
    if (flag.change_needed) {
      if (RevisionCount(session, TherapyState::kMakingLyrics) >= kRevisionCap) {
        auto d = Forward(registry, step, "lyrics revision limit reached; keeping the current lyrics");
        d.forced = true;
        return d;
      }
      TransitionDecision loop;
      loop.kind = TransitionKind::kStay;
      loop.next_step = std::string(kMakingLyricsStep);
      for (auto name : {kMakingLyricsStep, kLyricsDiscussionStep}) {
        const auto& vars = registry.Step(name).required_variables;
        loop.reset_variables.insert(loop.reset_variables.end(), vars.begin(), vars.end());
      }
      loop.reason = "user asked to change the lyrics";
      return loop;
    }
  }

  if (step.name == kRevisingMusicStep) {
    const auto& rec = std::get<MusicRecreation>(*session.vars.at(kMusicRecreationVar).value);
    if (rec.revise_lyrics || rec.revise_music) {
      const TherapyState target = rec.revise_lyrics ? TherapyState::kMakingLyrics : TherapyState::kMakingMusic;
      if (RevisionCount(session, target) >= kRevisionCap) {
        TransitionDecision d;
        d.kind = TransitionKind::kAdvanceStep;
        d.next_step = std::string(kSelfExplorationStep);
        d.reason = "revision limit reached; keeping the current song";
        d.forced = true;
        return d;
      }
      TransitionDecision revert;
      revert.kind = TransitionKind::kRevertTo;
      revert.revert_target = target;
      revert.next_step = registry.FirstStep(target).name;
      revert.reset_variables = VariablesFromStateOnward(registry, target);
      revert.reason = rec.revise_lyrics ? "user asked to revise the lyrics" : "user asked to revise the music";
      return revert;
    }
    TransitionDecision d;
    d.kind = TransitionKind::kAdvanceStep;
    d.next_step = std::string(kSelfExplorationStep);
    d.reason = "no changes requested";
    return d;
  }

  return Forward(registry, step, "step complete");
}

SessionState ApplyRevert(const Registry& registry, SessionState session, TherapyState target) {
  if (target != TherapyState::kMakingLyrics && target != TherapyState::kMakingMusic) {
    throw Error(ErrorCode::kContractViolation,
                "cannot revert to " + std::string(ToString(target)) + "; only MakingLyrics or MakingMusic");
  }
  for (const auto& id : VariablesFromStateOnward(registry, target)) session.vars.Reset(id);
  session.current = {target, registry.FirstStep(target).name};
  session.revision_counts[target] += 1;
  session.stalled_turns = 0;
  return session;
}

SessionState ApplyDecision(const Registry& registry, SessionState session,
                           const TransitionDecision& decision) {
  switch (decision.kind) {
    case TransitionKind::kRevertTo:
      return ApplyRevert(registry, std::move(session), *decision.revert_target);
    case TransitionKind::kEndSession:
      session.status = SessionStatus::kEnded;
      return session;
    case TransitionKind::kStay:
      if (decision.reset_variables.empty()) return session;
      for (const auto& id : decision.reset_variables) session.vars.Reset(id);
      session.revision_counts[session.current.state] += 1;
      break;
    case TransitionKind::kAdvanceStep:
    case TransitionKind::kAdvanceState:
      break;
  }
  const TherapyStep& next = registry.Step(decision.next_step);
  session.current = {next.state, next.name};
  session.stalled_turns = 0;
  return session;
}

}  // namespace songcraft::dialogue
