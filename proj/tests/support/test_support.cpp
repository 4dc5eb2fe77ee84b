#include "test_support.hpp"

#include <fstream>
#include <sstream>

#include "songcraft/errors.hpp"

namespace songcraft::testing {

std::filesystem::path SourceDir() { return SONGCRAFT_SOURCE_DIR; }
std::filesystem::path SessionFixtureDir(const std::string& name) {
  return SourceDir() / "tests" / "fixtures" / "sessions" / name;
}
std::filesystem::path SongFixtureDir() { return SourceDir() / "fixtures" / "songs"; }
std::filesystem::path GoldenDir() { return SourceDir() / "tests" / "fixtures" / "golden"; }

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SessionFixture LoadSessionFixture(const std::string& name) {
  const auto dir = SessionFixtureDir(name);
  const auto turns = nlohmann::json::parse(ReadText(dir / "turns.json"));
  return {turns.at("userName").get<std::string>(), turns.at("sessionId").get<std::string>(),
          turns.at("turns").get<std::vector<std::string>>(), gateway::ReplayScript::FromFile(dir / "script.json")};
}

Harness::Harness(gateway::ReplayScript script, SessionStore* s) : store(s) {
  scripted = std::make_unique<gateway::ScriptedBackend>(std::move(script));
  Init(*scripted);
}

Harness::Harness(gateway::ChatBackend& chat, SessionStore* s) : store(s) { Init(chat); }

void Harness::Init(gateway::ChatBackend& chat) {
  music = std::make_unique<music::FixtureMusicBackend>(SongFixtureDir());
  ServiceContext ctx;
  ctx.chat = &chat;
  ctx.music = music.get();
  ctx.analysis = music.get();
  ctx.gateway_options.base_backoff = std::chrono::milliseconds(0);
  if (!store) store = &memory;
  service_ = std::make_unique<SessionService>(ctx, *store);
}

FixtureRun RunFixture(const std::string& name) {
  auto fixture = LoadSessionFixture(name);
  Harness h(fixture.script);
  h.service().CreateSession(fixture.user_name, fixture.session_id);
  for (const auto& turn : fixture.turns) h.service().ProcessUserTurn(fixture.session_id, turn);
  FixtureRun run;
  run.final_state = h.service().Snapshot(fixture.session_id);
  run.transcript = h.service().ExportTranscript(fixture.session_id);
  for (std::size_t k = 0; k < run.final_state.artifacts.viz_scripts.size(); ++k) {
    run.viz_scripts.push_back(h.service().VizScript(fixture.session_id, k));
  }
  return run;
}

std::string FaultyBackend::Complete(const gateway::BackendRequest& request) {
  if (fail_(request)) {
    ++failures;
    throw Error(code_, "injected failure at call " + std::to_string(request.call_index));
  }
  return inner_.Complete(request);
}

}  // namespace songcraft::testing
