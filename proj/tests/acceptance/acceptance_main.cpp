// Acceptance suite: one PASS/FAIL line per criterion, each held to its time limit.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <latch>
#include <set>
#include <sstream>
#include <thread>

#include "alignment_oracle.hpp"
#include "songcraft/errors.hpp"
#include "songcraft/prompt_engine.hpp"
#include "songcraft/replay.hpp"
#include "songcraft/transcript.hpp"
#include "style_oracle.hpp"
#include "test_support.hpp"

using namespace songcraft;

namespace {

using dialogue::TherapyState;
using dialogue::TransitionKind;

// Failure message collector; the first problem wins.
struct Check {
  std::string failure;
  bool ok() const { return failure.empty(); }
  Check& Expect(bool cond, const std::string& what) {
    if (!cond && failure.empty()) failure = what;
    return *this;
  }
};

const dialogue::Registry& Reg() { return dialogue::Registry::Default(); }

const std::vector<std::string> kStepOrder{
    "rapport_building",   "motivation_building", "discussion_music_preference",
    "making_concept",     "making_lyrics",       "lyrics_discussion",
    "making_music",       "revising_music",      "musical_self_exploration"};

dialogue::VariableValue Sample(dialogue::VariableKind kind) {
  switch (kind) {
    case dialogue::VariableKind::kText: return std::string("x");
    case dialogue::VariableKind::kLyricsFlag: return dialogue::LyricsFlag{false};
    case dialogue::VariableKind::kMusicRecreation: return dialogue::MusicRecreation{false, false, ""};
  }
  return std::string();
}

class FnBackend : public gateway::ChatBackend {
 public:
  explicit FnBackend(std::function<std::string(const gateway::BackendRequest&)> fn) : fn_(std::move(fn)) {}
  std::string Complete(const gateway::BackendRequest& request) override { return fn_(request); }

 private:
  std::function<std::string(const gateway::BackendRequest&)> fn_;
};

class SlowBackend : public gateway::ChatBackend {
 public:
  explicit SlowBackend(gateway::ChatBackend& inner) : inner_(inner) {}
  std::string Complete(const gateway::BackendRequest& request) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    return inner_.Complete(request);
  }

 private:
  gateway::ChatBackend& inner_;
};

std::string StateMachine() {
  Check c;
  int subsets = 0;
  for (const auto& step : Reg().steps()) {
    const auto& ids = step.required_variables;
    for (unsigned mask = 0; mask < (1u << ids.size()); ++mask) {
      auto vars = Reg().EmptyVariableSet();
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (mask & (1u << k)) vars.Fill(ids[k], Sample(Reg().Variable(ids[k]).kind), 0);
      }
      const bool full = mask + 1 == (1u << ids.size());
      c.Expect(dialogue::CheckStepComplete(step, vars) == full, step.name + " mask " + std::to_string(mask));
      ++subsets;
    }
  }
  std::vector<std::string> names;
  for (const auto& s : Reg().steps()) names.push_back(s.name);
  c.Expect(names == kStepOrder, "registry steps differ from the step table");
  c.Expect(subsets == 36, "expected 36 fill subsets, saw " + std::to_string(subsets));

  const auto run = testing::RunFixture("full");
  std::vector<std::string> visited;
  for (const auto& t : run.final_state.history) {
    if (visited.empty() || visited.back() != t.state_at.step) visited.push_back(t.state_at.step);
  }
  c.Expect(visited == kStepOrder, "traversal did not visit the steps in order");
  c.Expect(run.final_state.status == SessionStatus::kEnded, "session did not end");
  int filled = 0;
  for (const auto& [id, entry] : run.final_state.vars.entries()) filled += entry.filled();
  c.Expect(filled == 16, std::to_string(filled) + " of 16 variables filled");
  return c.failure;
}

std::string Revisions() {
  Check c;
  struct Case {
    const char* fixture;
    std::size_t lyrics;
    std::size_t songs;
  };
  for (const auto& k : {Case{"lyrics-loop", 2, 1}, Case{"revert-lyrics", 2, 2}, Case{"revert-music", 1, 2}}) {
    auto fixture = testing::LoadSessionFixture(k.fixture);
    testing::Harness h(fixture.script);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    int revisions = 0;
    for (const auto& t : fixture.turns) {
      const auto before = h.service().Snapshot(fixture.session_id);
      const auto out = h.service().ProcessUserTurn(fixture.session_id, t);
      const auto& d = out.decision;
      if (d.kind != TransitionKind::kRevertTo && d.reset_variables.empty()) continue;
      ++revisions;
      const auto target = d.kind == TransitionKind::kRevertTo ? *d.revert_target : before.current.state;
      for (const auto& def : Reg().variables()) {
        if (dialogue::Ordinal(Reg().OwnerState(def.id)) < dialogue::Ordinal(target)) {
          c.Expect(out.snapshot.vars.at(def.id) == before.vars.at(def.id),
                   std::string(k.fixture) + ": " + def.id + " changed by the revision");
        }
      }
    }
    const auto s = h.service().Snapshot(fixture.session_id);
    const std::string at = k.fixture;
    c.Expect(revisions == 1, at + ": expected one revision");
    c.Expect(s.status == SessionStatus::kEnded, at + ": did not end");
    c.Expect(s.artifacts.lyrics_versions.size() == k.lyrics,
             at + ": lyrics versions " + std::to_string(s.artifacts.lyrics_versions.size()));
    c.Expect(s.artifacts.songs.size() == k.songs, at + ": songs " + std::to_string(s.artifacts.songs.size()));
  }
  return c.failure;
}

std::string PromptComposition() {
  constexpr std::string_view kRole =
      "You are a therapeutic assistant designed to support counseling and music therapy for DHH individuals";
  constexpr std::string_view kCrisis =
      "If the user expresses severe distress or self-harm thoughts, respond with supportive empathy and encourage "
      "them to seek professional or emergency help.";
  constexpr std::string_view kPlain = "plain string format only";
  const auto& lib = prompt::PromptLibrary::Default();
  Check c;
  int bundles = 0;
  for (const auto& step : Reg().steps()) {
    const auto& ids = step.required_variables;
    for (unsigned mask = 0; mask < (1u << ids.size()); ++mask) {
      SessionState s;
      s.session_id = "a";
      s.user_name = "Parang";
      s.vars = Reg().EmptyVariableSet();
      s.current = {step.state, step.name};
      std::set<std::string> unfilled;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (mask & (1u << k)) s.vars.Fill(ids[k], Sample(Reg().Variable(ids[k]).kind), 0);
        else unfilled.insert(ids[k]);
      }
      const auto b = prompt::ComposeDialoguePrompt(s, Reg(), lib);
      const auto& text = b.rendered_text;
      const std::string at = step.name + " mask " + std::to_string(mask) + ": ";
      c.Expect(text.find(kRole) != std::string::npos, at + "role sentence missing");
      c.Expect(text.find(kCrisis) != std::string::npos, at + "crisis rule missing");
      c.Expect(text.find(kPlain) != std::string::npos, at + "output constraint missing");
      for (const auto& other : Reg().steps()) {
        const bool present = text.find(lib.Guidance(other.state, other.name)) != std::string::npos;
        c.Expect(present == (other.name == step.name), at + "guidance of " + other.name);
      }
      const auto* section = b.Section("required_variables");
      std::set<std::string> listed;
      if (section) {
        std::istringstream lines(section->text);
        for (std::string line; std::getline(lines, line);) {
          if (line.rfind("- ", 0) == 0) listed.insert(line.substr(2, line.find(':') - 2));
        }
      }
      c.Expect(section && listed == unfilled, at + "listed variables differ from the unfilled ones");
      for (const auto& def : Reg().variables()) {
        if (!unfilled.count(def.id)) c.Expect(text.find("- " + def.id + ":") == std::string::npos, at + def.id + " listed");
      }
      ++bundles;
    }
  }
  c.Expect(bundles == 36, "composed " + std::to_string(bundles) + " bundles");
  return c.failure;
}

std::string AlignmentOracle() {
  const std::vector<std::string> alphabet{"la", "di", "da", "dum"};
  const auto exhaustive = testing::ExhaustiveAlignmentCheck(alphabet, 6);
  if (!exhaustive.failure.empty()) return exhaustive.failure;
  if (exhaustive.pairs != 5461ull * 5461ull) return "enumerated " + std::to_string(exhaustive.pairs) + " pairs";
  const auto random =
      testing::RandomAlignmentCheck({"la", "lah", "love", "loves", "da", "dum", "di"}, 200, 10, 20240501);
  if (!random.failure.empty()) return random.failure;
  return random.pairs == 200 ? "" : "random pairs " + std::to_string(random.pairs);
}

alignment::TimedLyrics Transfer(const std::vector<music::TranscriptToken>& tx, std::string_view lyrics,
                                std::int64_t duration) {
  const auto p = alignment::TokensFromTranscript(tx);
  const auto l = alignment::Tokenize(lyrics);
  return alignment::TransferTimings(alignment::Align(p, l), p, tx, l, duration);
}

std::string TimingTransfer() {
  using alignment::TimedEntry;
  using alignment::TimingSource;
  Check c;
  for (const char* name : {"fx-001.features.json", "fx-002.features.json"}) {
    const auto f = music::IngestFeatures(testing::ReadText(testing::SongFixtureDir() / name));
    std::string lyrics;
    for (const auto& t : f.predicted_transcript) lyrics += t.token + " ";
    const auto timed = Transfer(f.predicted_transcript, lyrics, 60000);
    bool same = timed.entries.size() == f.predicted_transcript.size();
    for (std::size_t i = 0; same && i < timed.entries.size(); ++i) {
      const auto& t = f.predicted_transcript[i];
      same = timed.entries[i] == TimedEntry{t.token, t.start_ms, t.end_ms, TimingSource::kMatched};
    }
    c.Expect(same, std::string(name) + ": identity is not bit-exact");
  }
  // Hand-computed subdivisions.
  auto gap = Transfer({{"rough", 0, 1000}, {"sky", 2000, 2600}}, "rough morning sky", 3000);
  c.Expect(gap.entries.size() == 3 && gap.entries[1] == TimedEntry{"morning", 1000, 2000, TimingSource::kInterpolated},
           "single gap");
  auto lead = Transfer({{"calm", 3000, 3500}}, "rough gray waves calm", 4000);
  c.Expect(lead.entries.size() == 4 && lead.entries[0] == TimedEntry{"rough", 0, 1000, TimingSource::kInterpolated} &&
               lead.entries[1] == TimedEntry{"gray", 1000, 2000, TimingSource::kInterpolated} &&
               lead.entries[2] == TimedEntry{"waves", 2000, 3000, TimingSource::kInterpolated},
           "leading run");
  auto trail = Transfer({{"calm", 0, 500}}, "calm rough gray waves", 1500);
  c.Expect(trail.entries.size() == 4 && trail.entries[1] == TimedEntry{"rough", 500, 833, TimingSource::kInterpolated} &&
               trail.entries[2] == TimedEntry{"gray", 833, 1166, TimingSource::kInterpolated} &&
               trail.entries[3] == TimedEntry{"waves", 1166, 1500, TimingSource::kInterpolated},
           "trailing run");
  auto spread = Transfer({}, "one two three", 900);
  c.Expect(spread.entries.size() == 3 && spread.entries[1] == TimedEntry{"two", 300, 600, TimingSource::kInterpolated},
           "no matches");
  const auto random = testing::RandomTimingCheck(500, 4242);
  c.Expect(random.failure.empty(), random.failure);
  c.Expect(random.pairs == 500, "random cases " + std::to_string(random.pairs));
  return c.failure;
}

std::string StylePrompt() {
  Check c;
  const auto random = testing::RandomStylePromptCheck(1000, 2025);
  c.Expect(random.empty(), random);
  music::MusicComponents example;
  example.instrumentation = {"piano"};
  example.tempo = "slow tempo";
  example.mood = "emotional";
  const auto p = music::BuildStylePrompt(example);
  c.Expect(std::set<std::string>(p.keywords.begin(), p.keywords.end()) ==
               std::set<std::string>{"piano", "slow tempo", "emotional"},
           "example keyword set: " + p.rendered_text);
  c.Expect(p.keywords.size() == 3, "example keyword count");
  return c.failure;
}

std::string VizCompilation() {
  Check c;
  const auto run = testing::RunFixture("full");
  c.Expect(run.viz_scripts.size() == 1 &&
               run.viz_scripts[0] == testing::ReadText(testing::GoldenDir() / "full.viz.json"),
           "golden VizScript differs");
  const auto& moods = viz::MoodStyleTable::Default();
  for (const char* name : {"fx-001.features.json", "fx-002.features.json"}) {
    auto f = music::IngestFeatures(testing::ReadText(testing::SongFixtureDir() / name));
    alignment::TimedLyrics timed;
    for (const auto& p : f.pitch_contour) {
      timed.entries.push_back({"w", p.time_ms, p.time_ms + 1, alignment::TimingSource::kMatched});
    }
    const auto script = viz::Compile(timed, f, moods, 60000);
    double lo = 2, hi = -1;
    for (const auto& e : script.lyric_events) {
      lo = std::min(lo, e.y_norm);
      hi = std::max(hi, e.y_norm);
    }
    c.Expect(std::abs(lo) <= 1e-9 && std::abs(hi - 1) <= 1e-9, std::string(name) + ": pitch extremes not at 0 and 1");
    c.Expect(script.beat_events.size() == f.beats.size(), std::string(name) + ": beats not conserved");
    for (auto& p : f.pitch_contour) p.pitch_hz = 220;
    for (const auto& e : viz::Compile(timed, f, moods, 60000).lyric_events) {
      c.Expect(e.y_norm == 0.5, std::string(name) + ": constant pitch not centred");
    }
  }
  music::FixtureMusicBackend backend(testing::SongFixtureDir());
  for (const char* fixture : {"full", "lyrics-loop", "revert-lyrics", "revert-music"}) {
    const auto r = testing::RunFixture(fixture);
    for (std::size_t k = 0; k < r.final_state.artifacts.songs.size(); ++k) {
      const auto f = music::IngestFeatures(backend.Analyze(r.final_state.artifacts.songs[k]));
      c.Expect(r.final_state.artifacts.viz_scripts[k].beat_events.size() == f.beats.size(),
               std::string(fixture) + ": beats not conserved");
    }
  }
  return c.failure;
}

std::string DeterminismAndReplay() {
  Check c;
  music::FixtureMusicBackend music(testing::SongFixtureDir());
  for (const char* name : {"full", "lyrics-loop", "revert-lyrics", "revert-music"}) {
    const auto fixture = testing::LoadSessionFixture(name);
    const auto a = testing::RunFixture(name);
    const auto b = testing::RunFixture(name);
    c.Expect(a.transcript == b.transcript && a.viz_scripts == b.viz_scripts &&
                 ToJson(a.final_state).dump() == ToJson(b.final_state).dump(),
             std::string(name) + ": two runs differ");
    ServiceContext ctx;
    ctx.music = &music;
    ctx.analysis = &music;
    ctx.gateway_options.base_backoff = std::chrono::milliseconds(0);
    const auto report = replay::Run(a.transcript, fixture.script, ctx);
    c.Expect(report.matches, std::string(name) + ": replay mismatch\n" + replay::Format(report));
    c.Expect(transcript::Summarize(report.final_state) == transcript::Summarize(a.final_state),
             std::string(name) + ": replayed final state differs");
  }
  return c.failure;
}

std::string IsolationAndAtomicity() {
  Check c;
  {
    FnBackend prose([](const gateway::BackendRequest& r) {
      return r.kind == prompt::PromptKind::kExtraction ? std::string("They seem ready.") : std::string("Go on.");
    });
    testing::Harness h(prose);
    h.service().CreateSession("Mina", std::string("x"));
    const auto before = h.service().Snapshot("x");
    const auto out = h.service().ProcessUserTurn("x", "I am ready.");
    c.Expect(out.snapshot.vars == before.vars, "extraction failure changed variables");
  }
  auto fixture = testing::LoadSessionFixture("full");
  for (std::uint64_t fail_call : {3u, 16u, 25u}) {
    gateway::ScriptedBackend inner(fixture.script);
    testing::FaultyBackend faulty(inner, [&](const gateway::BackendRequest& r) { return r.call_index == fail_call; },
                                  ErrorCode::kBackend);
    testing::Harness h(faulty);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    bool crashed = false;
    for (const auto& t : fixture.turns) {
      auto before = *h.store->Load(fixture.session_id, Reg());
      try {
        h.service().ProcessUserTurn(fixture.session_id, t);
      } catch (const Error&) {
        crashed = true;
        auto persisted = *h.store->Load(fixture.session_id, Reg());
        const bool pending = !persisted.history.empty() && persisted.history.back().pending_retry &&
                             persisted.history.back().text == t;
        c.Expect(pending, "crash at call " + std::to_string(fail_call) + ": user turn not kept");
        if (pending) persisted.history.pop_back();
        c.Expect(persisted == before, "crash at call " + std::to_string(fail_call) + ": state differs from pre-turn");
        break;
      }
    }
    c.Expect(crashed, "no crash injected at call " + std::to_string(fail_call));
  }
  {
    gateway::ScriptedBackend inner(fixture.script);
    SlowBackend slow(inner);
    testing::Harness h(slow);
    h.service().CreateSession(fixture.user_name, fixture.session_id);
    for (std::size_t round = 0; round < fixture.turns.size(); ++round) {
      std::atomic<int> ok{0};
      std::atomic<int> busy{0};
      std::latch start(16);
      std::vector<std::thread> callers;
      for (int k = 0; k < 16; ++k) {
        callers.emplace_back([&] {
          start.arrive_and_wait();
          try {
            h.service().ProcessUserTurn(fixture.session_id, fixture.turns[round]);
            ++ok;
          } catch (const Error& e) {
            if (e.code() == ErrorCode::kBusy) ++busy;
          }
        });
      }
      for (auto& t : callers) t.join();
      c.Expect(ok == 1 && busy == 15, "round " + std::to_string(round) + ": " + std::to_string(ok.load()) +
                                          " successes, " + std::to_string(busy.load()) + " busy");
    }
  }
  return c.failure;
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<std::string()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"state-machine conformance", 5, StateMachine},
      {"revision semantics", 5, Revisions},
      {"prompt composition", 2, PromptComposition},
      {"alignment oracle equivalence", 60, AlignmentOracle},
      {"timing transfer", 10, TimingTransfer},
      {"style prompt", 5, StylePrompt},
      {"viz compilation", 5, VizCompilation},
      {"determinism and replay", 10, DeterminismAndReplay},
      {"isolation and atomicity", 30, IsolationAndAtomicity},
  };
  int failed = 0;
  const auto suite_start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
      failure = c.run();
    } catch (const std::exception& e) {
      failure = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty() && secs > c.limit_s) failure = "took longer than the limit";
    std::printf("%s  %-30s %8.3f s (limit %g s)%s%s\n", failure.empty() ? "PASS" : "FAIL", c.name, secs, c.limit_s,
                failure.empty() ? "" : "  ", failure.c_str());
    std::fflush(stdout);
    failed += !failure.empty();
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  const bool in_time = total < 180;
  std::printf("%s  %-30s %8.3f s (limit 180 s)\n", in_time ? "PASS" : "FAIL", "total runtime", total);
  return failed || !in_time ? 1 : 0;
}
