// songcraft command-line tool: serve the HTTP API, run scripted sessions
// headlessly, replay transcripts and export stored sessions.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "songcraft/errors.hpp"
#include "songcraft/http_api.hpp"
#include "songcraft/llm_gateway.hpp"
#include "songcraft/replay.hpp"
#include "songcraft/session_service.hpp"
#include "songcraft/transcript.hpp"

namespace fs = std::filesystem;
using namespace songcraft;

namespace {

struct Config {
  std::string backend = "scripted";
  std::string endpoint;
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  std::string script;
  std::string prompt_library;
  std::string mood_table;
  std::string registry;
  std::size_t turn_budget = prompt::kDefaultTurnBudget;
  std::string fixtures = "fixtures/songs";
};

void AddConfigOptions(CLI::App& app, Config& c, bool with_backend) {
  if (with_backend) {
    app.add_option("--backend", c.backend, "Chat backend: live or scripted")
        ->envname("SONGCRAFT_BACKEND")
        ->check(CLI::IsMember({"live", "scripted"}));
    app.add_option("--endpoint", c.endpoint, "Chat-completion base URL (live)")->envname("SONGCRAFT_ENDPOINT");
    app.add_option("--model", c.model, "Model name (live)")->envname("SONGCRAFT_MODEL");
    app.add_option("--temperature", c.temperature, "Sampling temperature (live)")->envname("SONGCRAFT_TEMPERATURE");
    app.add_option("--script", c.script, "Replay script (scripted)")->envname("SONGCRAFT_SCRIPT");
  }
  app.add_option("--prompt-library", c.prompt_library, "Prompt library file")->envname("SONGCRAFT_PROMPT_LIBRARY");
  app.add_option("--mood-table", c.mood_table, "Mood table file")->envname("SONGCRAFT_MOOD_TABLE");
  app.add_option("--registry", c.registry, "State/step registry file")->envname("SONGCRAFT_REGISTRY");
  app.add_option("--turn-budget", c.turn_budget, "Chat turns kept in dialogue prompts")->envname("SONGCRAFT_TURN_BUDGET");
  app.add_option("--fixtures", c.fixtures, "Song fixture directory")->envname("SONGCRAFT_FIXTURES");
}

/// Owns the configuration objects and backends a service points into.
struct Runtime {
  std::unique_ptr<dialogue::Registry> registry;
  std::unique_ptr<prompt::PromptLibrary> library;
  std::unique_ptr<viz::MoodStyleTable> moods;
  std::unique_ptr<gateway::ChatBackend> chat;
  std::unique_ptr<music::FixtureMusicBackend> music;

  ServiceContext Context(const Config& c) const {
    ServiceContext ctx;
    if (registry) ctx.registry = registry.get();
    if (library) ctx.library = library.get();
    if (moods) ctx.moods = moods.get();
    ctx.chat = chat.get();
    ctx.music = music.get();
    ctx.analysis = music.get();
    ctx.turn_budget = c.turn_budget;
    return ctx;
  }
};

Runtime Load(const Config& c, bool need_chat) {
  Runtime rt;
  if (!c.registry.empty()) rt.registry = std::make_unique<dialogue::Registry>(dialogue::Registry::FromFile(c.registry));
  if (!c.prompt_library.empty()) {
    rt.library = std::make_unique<prompt::PromptLibrary>(prompt::PromptLibrary::FromFile(c.prompt_library));
  }
  if (!c.mood_table.empty()) rt.moods = std::make_unique<viz::MoodStyleTable>(viz::MoodStyleTable::FromFile(c.mood_table));
  rt.music = std::make_unique<music::FixtureMusicBackend>(c.fixtures);
  if (need_chat) {
    if (c.backend == "live") {
      gateway::HttpBackendConfig live;
      live.endpoint = c.endpoint;
      live.model = c.model;
      if (const char* key = std::getenv("SONGCRAFT_API_KEY")) live.api_key = key;
      live.temperature = c.temperature;
      rt.chat = std::make_unique<gateway::HttpChatBackend>(live);
    } else {
      if (c.script.empty()) throw Error(ErrorCode::kConfiguration, "scripted backend needs --script");
      rt.chat = std::make_unique<gateway::ScriptedBackend>(gateway::ReplayScript::FromFile(c.script));
    }
  }
  return rt;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw Error(ErrorCode::kPersistence, "cannot write " + path.string());
}

api::Server* g_server = nullptr;
extern "C" void OnSignal(int) {
  if (g_server) g_server->Stop();
}

int Serve(const Config& c, const std::string& host, int port, const std::string& store_dir) {
  auto rt = Load(c, true);
  std::unique_ptr<SessionStore> store;
  if (store_dir.empty()) store = std::make_unique<MemoryStore>();
  else store = std::make_unique<FileStore>(store_dir);
  SessionService service(rt.Context(c), *store);
  api::Server server(service);
  const int bound = server.Bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  return server.Run() ? 0 : 1;
}

struct TurnsFile {
  std::string user_name;
  std::string session_id;
  std::vector<std::string> turns;
};

TurnsFile ReadTurns(const std::string& path) {
  const auto doc = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kParse, path + ": not JSON");
  try {
    return {doc.at("userName").get<std::string>(), doc.value("sessionId", "session-1"),
            doc.at("turns").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

int RunSession(const Config& c, const std::string& turns_path, const std::string& out_dir, const std::string& record) {
  auto rt = Load(c, true);
  std::unique_ptr<gateway::RecordingBackend> recorder;
  if (!record.empty()) {
    recorder = std::make_unique<gateway::RecordingBackend>(*rt.chat);
  }
  auto ctx = rt.Context(c);
  if (recorder) ctx.chat = recorder.get();
  const auto input = ReadTurns(turns_path);
  MemoryStore store;
  SessionService service(ctx, store);
  service.CreateSession(input.user_name, input.session_id);
  int failures = 0;
  for (std::size_t i = 0; i < input.turns.size(); ++i) {
    try {
      const auto outcome = service.ProcessUserTurn(input.session_id, input.turns[i]);
      std::cout << "[" << i << "] " << dialogue::ToString(outcome.decision.kind) << " -> "
                << dialogue::ToString(outcome.snapshot.current.state) << "/" << outcome.snapshot.current.step << "\n";
    } catch (const Error& e) {
      std::cerr << "user turn " << i << ": " << e.what() << "\n";
      ++failures;
      break;
    }
  }
  const auto final_state = service.Snapshot(input.session_id);
  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    WriteFile(dir / "transcript.jsonl", service.ExportTranscript(input.session_id));
    for (std::size_t k = 0; k < final_state.artifacts.viz_scripts.size(); ++k) {
      WriteFile(dir / ("song-" + std::to_string(k) + ".viz.json"), service.VizScript(input.session_id, k));
    }
  }
  if (recorder) WriteFile(record, recorder->script().ToJson().dump(2) + "\n");
  std::cout << "status " << ToString(final_state.status) << ", " << final_state.history.size() << " turns, "
            << final_state.artifacts.songs.size() << " songs\n";
  return failures ? 1 : 0;
}

int Replay(const Config& c, const std::string& transcript_path, const std::string& script_path) {
  std::string text;
  gateway::ReplayScript script;
  try {
    text = ReadFile(transcript_path);
    script = gateway::ReplayScript::FromFile(script_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  auto rt = Load(c, false);
  try {
    const auto report = replay::Run(text, script, rt.Context(c));
    std::cout << replay::Format(report);
    return report.matches ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << transcript_path << ": " << e.what() << "\n";
    return 2;
  }
}

int Export(const std::string& store_dir, const std::string& session_id, const Config& c) {
  auto rt = Load(c, false);
  FileStore store(store_dir);
  const auto* registry = rt.registry ? rt.registry.get() : &dialogue::Registry::Default();
  auto state = store.Load(session_id, *registry);
  if (!state) {
    std::cerr << "no session " << session_id << " in " << store_dir << "\n";
    return 1;
  }
  std::cout << transcript::Export(*state);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"songcraft: therapeutic songwriting session service"};
  app.require_subcommand(1);
  Config config;

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_dir;
  AddConfigOptions(*serve, config, true);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks one)");
  serve->add_option("--store", store_dir, "Session store directory (memory when empty)")->envname("SONGCRAFT_STORE");

  auto* run = app.add_subcommand("run", "Run a session headlessly from a turns file");
  std::string turns_path;
  std::string out_dir;
  std::string record;
  AddConfigOptions(*run, config, true);
  run->add_option("--turns", turns_path, "JSON file {userName, sessionId, turns: [...]}")->required();
  run->add_option("--out", out_dir, "Directory for transcript.jsonl and song-<k>.viz.json");
  run->add_option("--record", record, "Write every backend exchange to this replay script");

  auto* replay_cmd = app.add_subcommand("replay", "Replay a transcript against a script and diff final states");
  std::string transcript_path;
  std::string script_path;
  AddConfigOptions(*replay_cmd, config, false);
  replay_cmd->add_option("transcript", transcript_path, "Transcript (.jsonl)")->required();
  replay_cmd->add_option("script", script_path, "Replay script (.json)")->required();

  auto* export_cmd = app.add_subcommand("export", "Print the transcript of a stored session");
  std::string session_id;
  AddConfigOptions(*export_cmd, config, false);
  export_cmd->add_option("--store", store_dir, "Session store directory")->envname("SONGCRAFT_STORE")->required();
  export_cmd->add_option("session", session_id, "Session id")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve) return Serve(config, host, port, store_dir);
    if (*run) return RunSession(config, turns_path, out_dir, record);
    if (*replay_cmd) return Replay(config, transcript_path, script_path);
    if (*export_cmd) return Export(store_dir, session_id, config);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
