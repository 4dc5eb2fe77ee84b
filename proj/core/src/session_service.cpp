#include "songcraft/session_service.hpp"

#include <random>

#include "songcraft/digest.hpp"
#include "songcraft/errors.hpp"
#include "songcraft/lyric_alignment.hpp"
#include "songcraft/transcript.hpp"
#include "text_util.hpp"

namespace songcraft {

namespace {

using dialogue::TransitionKind;

std::string RandomId() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int word = 0; word < 2; ++word) {
    auto bits = rng();
    for (int i = 0; i < 16; ++i, bits >>= 4) id.push_back(kHex[bits & 0xF]);
  }
  return id;
}

void Require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

}  // namespace

SessionService::SessionService(ServiceContext context, SessionStore& store)
    : context_(std::move(context)),
      store_(store),
      gateway_(*context_.chat, context_.gateway_options),
      registry_checksum_(Sha256Hex(context_.registry->ToJson().dump())) {
  Require(context_.chat && context_.music && context_.analysis, ErrorCode::kConfiguration,
          "session service needs chat, music and analysis backends");
  context_.library->ValidateAgainst(*context_.registry);
}

std::string SessionService::NewId() { return context_.id_generator ? context_.id_generator() : RandomId(); }

std::shared_ptr<SessionService::Slot> SessionService::Find(std::string_view session_id) {
  std::lock_guard lock(slots_mutex_);
  if (auto it = slots_.find(session_id); it != slots_.end()) return it->second;
  if (!IsValidSessionId(session_id)) throw Error(ErrorCode::kNotFound, "no session " + std::string(session_id));
  auto stored = store_.Load(session_id, *context_.registry);
  if (!stored) throw Error(ErrorCode::kNotFound, "no session " + std::string(session_id));
  auto slot = std::make_shared<Slot>();
  slot->committed = std::move(*stored);
  slots_.emplace(std::string(session_id), slot);
  return slot;
}

SessionState SessionService::Read(Slot& slot) {
  std::lock_guard lock(slot.snapshot_mutex);
  return slot.committed;
}

void SessionService::Publish(Slot& slot, SessionState state) {
  std::lock_guard lock(slot.snapshot_mutex);
  slot.committed = std::move(state);
}

ChatTurn SessionService::AgentReply(SessionState& work, const std::vector<std::string>& notices,
                                    std::vector<std::string>* warnings, std::string* digest) {
  prompt::DialogueOptions options{context_.turn_budget, notices};
  const auto bundle = prompt::ComposeDialoguePrompt(work, *context_.registry, *context_.library, options);
  ChatTurn turn = gateway_.CompleteDialogue(bundle, work.backend_calls++, warnings);
  turn.index = static_cast<int>(work.history.size());
  turn.state_at = work.current;
  if (digest) *digest = bundle.digest;
  return turn;
}

SessionState SessionService::CreateSession(std::string_view user_name, std::optional<std::string> session_id) {
  const std::string name = text::Trim(user_name);
  Require(!name.empty(), ErrorCode::kContractViolation, "user name must not be blank");

  SessionState state;
  state.session_id = session_id ? *session_id : NewId();
  Require(IsValidSessionId(state.session_id), ErrorCode::kContractViolation,
          "invalid session id '" + state.session_id + "'");
  state.user_name = name;
  const auto& first = context_.registry->FirstStep(dialogue::TherapyState::kTherapeuticConnection);
  state.current = {first.state, first.name};
  state.vars = context_.registry->EmptyVariableSet();

  auto slot = std::make_shared<Slot>();
  std::lock_guard turn_lock(slot->turn_mutex);
  {
    std::lock_guard lock(slots_mutex_);
    Require(!slots_.count(state.session_id) && !store_.Load(state.session_id, *context_.registry),
            ErrorCode::kContractViolation, "session " + state.session_id + " already exists");
    slots_.emplace(state.session_id, slot);
  }
  try {
    std::string digest;
    ChatTurn opening = AgentReply(state, {}, nullptr, &digest);
    if (opening.crisis_flagged) state.banner = std::string(kCrisisBanner);
    const transcript::SessionHeader header{state.session_id, state.user_name, context_.library->checksum(),
                                           registry_checksum_};
    state.records.push_back(transcript::TurnRecord(opening, digest, &header));
    state.history.push_back(std::move(opening));
    store_.Commit(state);
  } catch (...) {
    std::lock_guard lock(slots_mutex_);
    slots_.erase(state.session_id);
    throw;
  }
  Publish(*slot, state);
  return state;
}

void SessionService::GenerateLyrics(SessionState& work) {
  const auto bundle = prompt::ComposeLyricsPrompt(work, *context_.registry, *context_.library);
  const auto text = gateway_.Generate(bundle, work.backend_calls++);
  work.artifacts.lyrics_versions.push_back(music::ParseLyricsDocument(text));
}

void SessionService::GenerateSong(SessionState& work) {
  Require(!work.artifacts.lyrics_versions.empty(), ErrorCode::kContractViolation,
          "cannot generate music before lyrics exist");
  const auto& concept_entry = work.vars.at("music_concept");
  const std::string concept_text = concept_entry.value ? std::get<std::string>(*concept_entry.value) : std::string();
  auto components = music::ParseMusicComponents(concept_text);
  const auto style = music::BuildStylePrompt(components);
  const auto& lyrics = work.artifacts.lyrics_versions.back();
  const int ordinal = static_cast<int>(work.artifacts.songs.size()) + 1;
  auto song = music::RequestSong(*context_.music, lyrics, style, ordinal);
  const auto features = music::IngestFeatures(context_.analysis->Analyze(song));

  const auto predicted = alignment::TokensFromTranscript(features.predicted_transcript);
  const auto lyric_tokens = alignment::Tokenize(lyrics.LyricLines());
  const auto path = alignment::Align(predicted, lyric_tokens);
  const auto timed =
      alignment::TransferTimings(path, predicted, features.predicted_transcript, lyric_tokens, song.duration_ms);
  auto script = viz::Compile(timed, features, *context_.moods, song.duration_ms);

  work.artifacts.style_prompts.push_back(style);
  work.artifacts.songs.push_back(std::move(song));
  work.artifacts.viz_scripts.push_back(std::move(script));
}

void SessionService::RunTurn(SessionState& work, const std::string& text, TurnOutcome& outcome) {
  const auto& registry = *context_.registry;
  const int user_index = static_cast<int>(work.history.size());
  ChatTurn user_turn;
  user_turn.index = user_index;
  user_turn.speaker = Speaker::kUser;
  user_turn.text = text;
  user_turn.state_at = work.current;
  user_turn.crisis_flagged = gateway::MatchesCrisisLexicon(text, context_.gateway_options.crisis_lexicon);
  if (user_turn.crisis_flagged) work.banner = std::string(kCrisisBanner);
  work.records.push_back(transcript::TurnRecord(user_turn, std::nullopt));
  work.history.push_back(std::move(user_turn));

  const dialogue::TherapyStep& step = registry.Step(work.current.step);
  bool filled_any = false;
  bool has_unfilled = false;
  for (const auto& id : step.required_variables) has_unfilled |= !work.vars.IsFilled(id);
  if (has_unfilled) {
    const auto bundle = prompt::ComposeExtractionPrompt(work, step, *context_.library);
    try {
      auto result = gateway_.ExtractVariables(bundle, step, work.vars, work.backend_calls++);
      for (const auto& [id, value] : result.values) {
        work.vars.Fill(id, value, user_index);
        filled_any = true;
      }
      outcome.warnings.insert(outcome.warnings.end(), result.warnings.begin(), result.warnings.end());
      work.records.push_back(transcript::ExtractionRecord(user_index, work.current, result, bundle.digest));
    } catch (const ExtractionFailed& e) {
      outcome.warnings.push_back(e.what());
      work.records.push_back(
          transcript::FailedExtractionRecord(user_index, work.current, e.raw_backend_text(), bundle.digest));
    }
  }
  work.stalled_turns = filled_any ? 0 : work.stalled_turns + 1;

  const auto decision = dialogue::NextTransition(registry, work);
  std::vector<std::string> notices;
  if (decision.changes_session()) {
    std::vector<std::string> actions;
    const StepRef from = work.current;
    const bool leaving = decision.kind == TransitionKind::kAdvanceStep || decision.kind == TransitionKind::kAdvanceState;
    if (leaving && step.HasAction(dialogue::kGenerateMusic)) {
      GenerateSong(work);
      if (step.HasAction(dialogue::kGenerateStylePrompt)) actions.emplace_back(dialogue::kGenerateStylePrompt);
      actions.emplace_back(dialogue::kGenerateMusic);
    }
    work = dialogue::ApplyDecision(registry, std::move(work), decision);
    if (decision.kind != TransitionKind::kEndSession &&
        registry.Step(work.current.step).HasAction(dialogue::kGenerateLyrics)) {
      GenerateLyrics(work);
      actions.emplace_back(dialogue::kGenerateLyrics);
    }
    work.records.push_back(transcript::TransitionRecord(user_index, from, work.current, decision, actions));
    if (decision.forced) notices.push_back(context_.library->Get("notice.revision_cap"));
  }

  const auto& lib = *context_.library;
  if (work.status == SessionStatus::kEnded) {
    notices.push_back(lib.Get("notice.closing"));
  } else {
    if (work.stalled_turns >= dialogue::kStallLimit) notices.push_back(lib.Get("notice.reoffer"));
    const auto& current = registry.Step(work.current.step);
    if (current.HasAction(dialogue::kGenerateLyrics) && !work.artifacts.lyrics_versions.empty()) {
      notices.push_back(prompt::Interpolate(lib.Get("notice.lyrics"),
                                            {{"lyrics", work.artifacts.lyrics_versions.back().full_text}}));
    }
    if (current.state == dialogue::TherapyState::kSongDiscussion && !work.artifacts.songs.empty()) {
      const auto& title = work.vars.at("title");
      notices.push_back(prompt::Interpolate(
          lib.Get("notice.song"),
          {{"title", title.value ? std::get<std::string>(*title.value) : std::string("untitled")},
           {"style", work.artifacts.style_prompts.back().rendered_text}}));
    }
  }

  std::string digest;
  ChatTurn agent = AgentReply(work, notices, &outcome.warnings, &digest);
  if (agent.crisis_flagged) work.banner = std::string(kCrisisBanner);
  work.records.push_back(transcript::TurnRecord(agent, digest));
  work.history.push_back(agent);
  outcome.agent_turn = std::move(agent);
  outcome.decision = decision;
}

TurnOutcome SessionService::ProcessUserTurn(std::string_view session_id, std::string_view text) {
  auto slot = Find(session_id);
  std::unique_lock turn_lock(slot->turn_mutex, std::try_to_lock);
  if (!turn_lock.owns_lock()) {
    throw Error(ErrorCode::kBusy, "session " + std::string(session_id) + " is processing another turn");
  }
  SessionState before = Read(*slot);
  if (before.status == SessionStatus::kEnded) {
    throw Error(ErrorCode::kSessionEnded, "session " + before.session_id + " has ended");
  }
  const std::string trimmed = text::Trim(text);
  Require(!trimmed.empty(), ErrorCode::kContractViolation, "turn text must not be blank");
  if (!before.history.empty() && before.history.back().pending_retry) before.history.pop_back();

  SessionState work = before;
  TurnOutcome outcome;
  try {
    RunTurn(work, trimmed, outcome);
    store_.Commit(work);
  } catch (const Error&) {
    SessionState kept = std::move(before);
    ChatTurn pending;
    pending.index = static_cast<int>(kept.history.size());
    pending.speaker = Speaker::kUser;
    pending.text = trimmed;
    pending.state_at = kept.current;
    pending.pending_retry = true;
    kept.history.push_back(std::move(pending));
    try {
      store_.Commit(kept);
      Publish(*slot, std::move(kept));
    } catch (const Error&) {
      // The store still holds the last good snapshot.
    }
    throw;
  }
  Publish(*slot, work);
  outcome.snapshot = std::move(work);
  return outcome;
}

SessionState SessionService::EndSession(std::string_view session_id) {
  auto slot = Find(session_id);
  std::unique_lock turn_lock(slot->turn_mutex, std::try_to_lock);
  if (!turn_lock.owns_lock()) {
    throw Error(ErrorCode::kBusy, "session " + std::string(session_id) + " is processing another turn");
  }
  SessionState work = Read(*slot);
  if (work.status == SessionStatus::kEnded) return work;
  dialogue::TransitionDecision decision;
  decision.kind = TransitionKind::kEndSession;
  decision.next_step = work.current.step;
  decision.reason = "ended by the user";
  const StepRef at = work.current;
  work.status = SessionStatus::kEnded;
  work.records.push_back(
      transcript::TransitionRecord(static_cast<int>(work.history.size()) - 1, at, at, decision, {}));
  store_.Commit(work);
  Publish(*slot, work);
  return work;
}

SessionState SessionService::Snapshot(std::string_view session_id) { return Read(*Find(session_id)); }

std::string SessionService::VizScript(std::string_view session_id, std::size_t index) {
  const auto state = Snapshot(session_id);
  if (index >= state.artifacts.viz_scripts.size()) {
    throw Error(ErrorCode::kNotFound, "session " + state.session_id + " has no song " + std::to_string(index));
  }
  return viz::SerializeScript(state.artifacts.viz_scripts[index]);
}

std::string SessionService::ExportTranscript(std::string_view session_id) {
  return transcript::Export(Snapshot(session_id));
}

nlohmann::ordered_json SnapshotView(const SessionState& session, const dialogue::Registry& registry) {
  nlohmann::ordered_json view;
  view["sessionId"] = session.session_id;
  view["userName"] = session.user_name;
  view["status"] = ToString(session.status);
  view["state"] = dialogue::ToString(session.current.state);
  view["stateIndex"] = dialogue::Ordinal(session.current.state);
  view["step"] = session.current.step;
  auto& unfilled = view["unfilledVariables"] = nlohmann::ordered_json::array();
  for (const auto& id : registry.Step(session.current.step).required_variables) {
    if (!session.vars.IsFilled(id)) unfilled.push_back({{"id", id}, {"description", session.vars.at(id).description}});
  }
  view["lastAgentTurn"] = nullptr;
  for (auto it = session.history.rbegin(); it != session.history.rend(); ++it) {
    if (it->speaker == Speaker::kAgent) {
      view["lastAgentTurn"] = ToJson(*it);
      break;
    }
  }
  view["optionChips"] = view["lastAgentTurn"].is_null() ? nlohmann::ordered_json::array()
                                                        : view["lastAgentTurn"]["optionChips"];
  view["pendingRetry"] = !session.history.empty() && session.history.back().pending_retry;
  view["banner"] = session.banner;
  view["songCount"] = session.artifacts.songs.size();
  auto& history = view["history"] = nlohmann::ordered_json::array();
  for (const auto& turn : session.history) history.push_back(ToJson(turn));
  return view;
}

}  // namespace songcraft
