#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "songcraft/errors.hpp"
#include "songcraft/session_store.hpp"
#include "test_support.hpp"

namespace songcraft {
namespace {

namespace fs = std::filesystem;

const dialogue::Registry& Reg() { return dialogue::Registry::Default(); }

SessionState Finished() { return testing::RunFixture("full").final_state; }

fs::path FreshDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("songcraft-store-" + name + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(dir);
  return dir;
}

TEST(SessionId, Validity) {
  EXPECT_TRUE(IsValidSessionId("a"));
  EXPECT_TRUE(IsValidSessionId("Session_01-x"));
  EXPECT_TRUE(IsValidSessionId(std::string(64, 'z')));
  EXPECT_FALSE(IsValidSessionId(""));
  EXPECT_FALSE(IsValidSessionId(std::string(65, 'z')));
  EXPECT_FALSE(IsValidSessionId("../etc"));
  EXPECT_FALSE(IsValidSessionId("a b"));
}

TEST(SessionJson, FullSessionRoundTrips) {
  const auto state = Finished();
  const auto back = SessionFromJson(nlohmann::ordered_json::parse(ToJson(state).dump()), Reg());
  EXPECT_EQ(back, state);
}

TEST(MemoryStore, CommitAndLoad) {
  MemoryStore store;
  EXPECT_FALSE(store.Load("full", Reg()));
  const auto state = Finished();
  store.Commit(state);
  auto loaded = store.Load("full", Reg());
  ASSERT_TRUE(loaded);
  EXPECT_EQ(*loaded, state);
  EXPECT_EQ(store.SessionIds(), std::vector<std::string>{"full"});
}

TEST(FileStore, LastCommitWins) {
  const auto dir = FreshDir("last");
  FileStore store(dir);
  auto state = Finished();
  store.Commit(state);
  state.banner = "second";
  store.Commit(state);
  auto loaded = store.Load("full", Reg());
  ASSERT_TRUE(loaded);
  EXPECT_EQ(*loaded, state);
  EXPECT_EQ(store.SessionIds(), std::vector<std::string>{"full"});

  FileStore reopened(dir);
  EXPECT_EQ(*reopened.Load("full", Reg()), state);
  fs::remove_all(dir);
}

TEST(FileStore, TornTrailingLineIsIgnored) {
  const auto dir = FreshDir("torn");
  FileStore store(dir);
  const auto state = Finished();
  store.Commit(state);
  {
    std::ofstream out(dir / "full.jsonl", std::ios::app | std::ios::binary);
    const auto line = ToJson(state).dump();
    out << line.substr(0, line.size() / 2);
  }
  auto loaded = store.Load("full", Reg());
  ASSERT_TRUE(loaded);
  EXPECT_EQ(*loaded, state);
  fs::remove_all(dir);
}

TEST(FileStore, InvalidIdsAreRejected) {
  const auto dir = FreshDir("invalid");
  FileStore store(dir);
  auto state = Finished();
  state.session_id = "../escape";
  try {
    store.Commit(state);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContractViolation);
  }
  EXPECT_THROW(store.Load("../escape", Reg()), Error);
  fs::remove_all(dir);
}

TEST(FileStore, MissingSessionIsEmpty) {
  const auto dir = FreshDir("missing");
  FileStore store(dir);
  EXPECT_FALSE(store.Load("nobody", Reg()));
  EXPECT_TRUE(store.SessionIds().empty());
  fs::remove_all(dir);
}

TEST(FileStore, ServiceResumesFromDisk) {
  const auto dir = FreshDir("resume");
  auto fixture = testing::LoadSessionFixture("full");
  const std::size_t half = fixture.turns.size() / 2;
  {
    FileStore store(dir);
    testing::Harness h(fixture.script, &store);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    for (std::size_t i = 0; i < half; ++i) h.service().ProcessUserTurn(fixture.session_id, fixture.turns[i]);
  }
  FileStore store(dir);
  testing::Harness h(fixture.script, &store);
  for (std::size_t i = half; i < fixture.turns.size(); ++i) h.service().ProcessUserTurn(fixture.session_id, fixture.turns[i]);
  EXPECT_EQ(h.service().Snapshot(fixture.session_id), Finished());
  fs::remove_all(dir);
}

}  // namespace
}  // namespace songcraft
