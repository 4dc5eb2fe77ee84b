#include <gtest/gtest.h>

#include "songcraft/errors.hpp"
#include "songcraft/llm_gateway.hpp"
#include "test_support.hpp"

namespace songcraft::gateway {
namespace {

using testing::LoadSessionFixture;

BackendRequest Request(std::uint64_t call, prompt::PromptKind kind = prompt::PromptKind::kDialogue) {
  BackendRequest r;
  r.kind = kind;
  r.prompt_text = "p";
  r.digest = "d" + std::to_string(call);
  r.call_index = call;
  return r;
}

TEST(ScriptedBackend, EmptyScriptMisses) {
  ScriptedBackend backend({});
  try {
    backend.Complete(Request(0));
    FAIL();
  } catch (const ScriptedMiss& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScriptedMiss);
    EXPECT_EQ(e.digest(), "d0");
    EXPECT_NE(std::string(e.what()).find("d0"), std::string::npos);
  }
}

TEST(ScriptedBackend, DigestEntriesWinOverCallEntries) {
  ReplayScript script;
  script.entries.push_back({0, prompt::PromptKind::kDialogue, "by call", std::nullopt, {}});
  script.entries.push_back({std::nullopt, prompt::PromptKind::kDialogue, "by digest", std::string("d0"), {}});
  ScriptedBackend backend(script);
  EXPECT_EQ(backend.Complete(Request(0)), "by digest");
}

TEST(ScriptedBackend, KindMismatchMisses) {
  ReplayScript script;
  script.entries.push_back({0, prompt::PromptKind::kExtraction, "{}", std::nullopt, {}});
  ScriptedBackend backend(script);
  EXPECT_THROW(backend.Complete(Request(0)), ScriptedMiss);
}

TEST(ReplayScript, JsonRoundTripAndObjectReplies) {
  auto doc = nlohmann::json::parse(R"({"format": "songcraft-replay-script", "version": 1, "entries": [
      {"call": 0, "kind": "dialogue", "reply": "Hi"},
      {"call": 1, "kind": "extraction", "reply": {"user_ready": "yes"}},
      {"digest": "abc", "kind": "generation", "reply": "[Verse]", "sections": {"role": "r1"}}]})");
  auto script = ReplayScript::FromJson(doc);
  ASSERT_EQ(script.entries.size(), 3u);
  EXPECT_EQ(script.entries[1].reply, R"({"user_ready":"yes"})");
  EXPECT_EQ(ReplayScript::FromJson(nlohmann::json::parse(script.ToJson().dump())), script);
}

TEST(ReplayScript, RejectsMalformedDocuments) {
  for (const char* text : {R"({"format": "other", "version": 1, "entries": []})",
                           R"({"format": "songcraft-replay-script", "version": 9, "entries": []})",
                           R"({"format": "songcraft-replay-script", "version": 1, "entries": [{"reply": "x"}]})",
                           R"({"format": "songcraft-replay-script", "version": 1, "entries": [{"call": 0, "kind": "poem", "reply": "x"}]})"}) {
    try {
      ReplayScript::FromJson(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
    }
  }
}

// Records a full session with pinned digests, then edits one guidance entry:
// the replay must stop and name the section that changed.
TEST(ScriptedBackend, PinnedDigestNamesTheChangedSection) {
  auto fixture = LoadSessionFixture("full");
  ScriptedBackend inner(fixture.script);
  RecordingBackend recorder(inner);
  {
    testing::Harness h(recorder);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    for (const auto& t : fixture.turns) h.service().ProcessUserTurn(fixture.session_id, t);
  }
  const auto pinned = recorder.script();
  ASSERT_FALSE(pinned.entries.empty());
  for (const auto& e : pinned.entries) ASSERT_TRUE(e.digest);

  // Unchanged prompts replay cleanly from the pinned script.
  {
    testing::Harness h(pinned);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    for (const auto& t : fixture.turns) h.service().ProcessUserTurn(fixture.session_id, t);
    EXPECT_EQ(h.service().Snapshot(fixture.session_id).status, SessionStatus::kEnded);
  }

  const auto& lib = prompt::PromptLibrary::Default();
  const auto key = prompt::PromptLibrary::GuidanceKey(dialogue::TherapyState::kMakingLyrics, "making_concept");
  const auto edited = lib.WithEntry(key, lib.Get(key) + " Keep it brief.");
  ScriptedBackend replay(pinned);
  auto music = std::make_unique<music::FixtureMusicBackend>(testing::SongFixtureDir());
  ServiceContext ctx;
  ctx.library = &edited;
  ctx.chat = &replay;
  ctx.music = music.get();
  ctx.analysis = music.get();
  ctx.gateway_options.base_backoff = std::chrono::milliseconds(0);
  MemoryStore store;
  SessionService service(ctx, store);
  service.CreateSession(fixture.user_name, fixture.session_id);
  bool missed = false;
  for (const auto& t : fixture.turns) {
    try {
      service.ProcessUserTurn(fixture.session_id, t);
    } catch (const ScriptedMiss& e) {
      EXPECT_EQ(e.changed_sections(), std::vector<std::string>{"state_guidance"});
      EXPECT_NE(std::string(e.what()).find("state_guidance"), std::string::npos) << e.what();
      // The miss comes from the reply on entering making_concept; that turn is rolled back.
      EXPECT_EQ(service.Snapshot(fixture.session_id).current.step, "discussion_music_preference");
      EXPECT_TRUE(service.Snapshot(fixture.session_id).history.back().pending_retry);
      missed = true;
      break;
    }
  }
  EXPECT_TRUE(missed);
}

TEST(ScriptedBackend, FullFixtureIsDeterministic) {
  auto a = testing::RunFixture("full");
  auto b = testing::RunFixture("full");
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.viz_scripts, b.viz_scripts);
  EXPECT_EQ(ToJson(a.final_state).dump(), ToJson(b.final_state).dump());
}

}  // namespace
}  // namespace songcraft::gateway
