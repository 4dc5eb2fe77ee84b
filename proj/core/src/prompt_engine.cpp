#include "songcraft/prompt_engine.hpp"

#include <fstream>
#include <sstream>

#include "embedded_config.hpp"
#include "songcraft/digest.hpp"
#include "songcraft/errors.hpp"
#include "text_util.hpp"

namespace songcraft::prompt {

namespace {

using dialogue::TherapyState;
using Values = std::map<std::string, std::string, std::less<>>;

constexpr std::string_view kRequiredKeys[] = {
    "general.role",           "general.chat_history",    "general.state_guidance",
    "general.required_variables", "general.dialogue_rules", "general.supportive_empathy",
    "general.crisis_rules",   "general.output_constraints", "extraction.role",
    "extraction.dialogue_rules", "extraction.recent_turns", "extraction.required_variables",
    "extraction.output_schema", "schema.text",            "schema.lyrics_flag",
    "schema.music_recreation", "generation.lyricist",     "generation.inputs",
    "generation.output_constraints", "notice.reoffer",    "notice.revision_cap",
    "notice.closing",         "notice.lyrics",           "notice.song",
};

constexpr std::string_view kGuidancePrefix = "guidance ";
constexpr std::string_view kLyricsInputs[] = {"concept", "emotion", "lyrics_keyword", "lyrics_sentence",
                                              "lyrics_flow"};

bool IsIdentStart(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool IsIdentChar(char c) { return IsIdentStart(c) || (c >= '0' && c <= '9'); }

/// Length of the {identifier} starting at text[pos], or 0.
std::size_t PlaceholderAt(std::string_view text, std::size_t pos) {
  if (text[pos] != '{' || pos + 1 >= text.size() || !IsIdentStart(text[pos + 1])) return 0;
  std::size_t end = pos + 2;
  while (end < text.size() && IsIdentChar(text[end])) ++end;
  if (end >= text.size() || text[end] != '}') return 0;
  return end - pos + 1;
}

/// User-provided text must not be able to form a placeholder.
std::string Defang(std::string s) {
  for (auto& c : s) {
    if (c == '{') c = '(';
    if (c == '}') c = ')';
  }
  return s;
}

std::string TrimRight(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
  return s;
}

std::string ValueText(const dialogue::VariableValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* f = std::get_if<dialogue::LyricsFlag>(&value)) {
    return f->change_needed ? "change needed" : "no change needed";
  }
  const auto& r = std::get<dialogue::MusicRecreation>(value);
  std::string out = std::string("revise lyrics: ") + (r.revise_lyrics ? "yes" : "no") +
                    "; revise music: " + (r.revise_music ? "yes" : "no");
  if (!r.notes.empty()) out += "; notes: " + r.notes;
  return out;
}

std::string VariableList(const dialogue::RequiredVariableSet& vars, const std::vector<dialogue::VariableId>& ids) {
  if (ids.empty()) return "(none)";
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += '\n';
    out += "- " + id + ": " + vars.at(id).description;
  }
  return out;
}

std::vector<dialogue::VariableId> Unfilled(const dialogue::TherapyStep& step,
                                           const dialogue::RequiredVariableSet& vars) {
  std::vector<dialogue::VariableId> out;
  for (const auto& id : step.required_variables) {
    if (!vars.IsFilled(id)) out.push_back(id);
  }
  return out;
}

PromptBundle Finish(PromptKind kind, std::vector<PromptSection> sections, std::optional<StepRef> ref,
                    std::vector<dialogue::VariableId> requested) {
  PromptBundle bundle;
  bundle.kind = kind;
  bundle.state_ref = std::move(ref);
  bundle.requested_variables = std::move(requested);
  for (auto& s : sections) {
    s.text = TrimRight(std::move(s.text));
    if (!bundle.rendered_text.empty()) bundle.rendered_text += "\n\n";
    bundle.rendered_text += "## " + s.id + "\n" + s.text;
    bundle.section_digests[s.id] = Sha256Hex(s.text);
  }
  bundle.sections = std::move(sections);
  if (auto leftover = FindPlaceholder(bundle.rendered_text)) {
    throw Error(ErrorCode::kComposition, "unresolved placeholder {" + *leftover + "} in " +
                                             std::string(ToString(kind)) + " prompt");
  }
  bundle.digest = Sha256Hex(bundle.rendered_text);
  return bundle;
}

}  // namespace

// --- PromptLibrary ----------------------------------------------------------------

const PromptLibrary& PromptLibrary::Default() {
  static const PromptLibrary library = [] {
    auto lib = Parse(embedded::PromptLibraryDocument());
    lib.ValidateAgainst(dialogue::Registry::Default());
    return lib;
  }();
  return library;
}

PromptLibrary PromptLibrary::Parse(std::string_view text) {
  PromptLibrary lib;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string key;
  std::string body;
  int line_no = 0;
  auto flush = [&] {
    if (key.empty()) return;
    auto trimmed = TrimRight(body);
    const auto first = trimmed.find_first_not_of('\n');
    trimmed = first == std::string::npos ? std::string() : trimmed.substr(first);
    if (!lib.entries_.emplace(key, std::move(trimmed)).second) {
      throw Error(ErrorCode::kConfiguration, "prompt library: duplicate section " + key);
    }
    body.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("@@", 0) == 0) {
      flush();
      key = text::Trim(std::string_view(line).substr(2));
      if (key.empty()) {
        throw Error(ErrorCode::kConfiguration, "prompt library line " + std::to_string(line_no) + ": empty section key");
      }
      continue;
    }
    if (key.empty()) {
      const auto t = text::Trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.rfind("@version", 0) == 0) {
        lib.version_ = text::Trim(std::string_view(t).substr(8));
      } else if (t.rfind("@language", 0) == 0) {
        lib.language_ = text::Trim(std::string_view(t).substr(9));
      } else {
        throw Error(ErrorCode::kConfiguration,
                    "prompt library line " + std::to_string(line_no) + ": text outside a section");
      }
      continue;
    }
    body += line;
    body += '\n';
  }
  flush();
  if (lib.version_.empty()) throw Error(ErrorCode::kConfiguration, "prompt library has no @version");
  for (auto required : kRequiredKeys) {
    if (!lib.Find(required)) {
      throw Error(ErrorCode::kConfiguration, "prompt library is missing section " + std::string(required));
    }
  }
  lib.Finish();
  return lib;
}

PromptLibrary PromptLibrary::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot open prompt library " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void PromptLibrary::Finish() { checksum_ = Sha256Hex(Serialize()); }

const std::string* PromptLibrary::Find(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::string& PromptLibrary::Get(std::string_view key) const {
  if (const auto* text = Find(key)) return *text;
  throw Error(ErrorCode::kConfiguration, "prompt library has no entry " + std::string(key));
}

std::string PromptLibrary::GuidanceKey(TherapyState state, std::string_view step) {
  return std::string(kGuidancePrefix) + std::string(dialogue::ToString(state)) + "/" + std::string(step);
}

const std::string& PromptLibrary::Guidance(TherapyState state, std::string_view step) const {
  const auto key = GuidanceKey(state, step);
  if (const auto* text = Find(key)) return *text;
  throw Error(ErrorCode::kConfiguration, "no guidance for " + key.substr(kGuidancePrefix.size()));
}

void PromptLibrary::ValidateAgainst(const dialogue::Registry& registry) const {
  std::size_t guidance_entries = 0;
  for (const auto& [key, text] : entries_) {
    if (key.rfind(kGuidancePrefix, 0) == 0) ++guidance_entries;
  }
  for (const auto& step : registry.steps()) Guidance(step.state, step.name);
  if (guidance_entries != registry.steps().size()) {
    throw Error(ErrorCode::kConfiguration, "prompt library has guidance for steps missing from the registry");
  }
}

PromptLibrary PromptLibrary::WithEntry(std::string key, std::string text) const {
  PromptLibrary copy = *this;
  copy.entries_[std::move(key)] = TrimRight(std::move(text));
  copy.Finish();
  return copy;
}

std::string PromptLibrary::Serialize() const {
  std::string out = "@version " + version_ + "\n";
  if (!language_.empty()) out += "@language " + language_ + "\n";
  for (const auto& [key, text] : entries_) {
    out += "\n@@ " + key + "\n" + text + "\n";
  }
  return out;
}

// --- Composition --------------------------------------------------------------------

std::string_view ToString(PromptKind kind) {
  switch (kind) {
    case PromptKind::kDialogue: return "dialogue";
    case PromptKind::kExtraction: return "extraction";
    case PromptKind::kGeneration: return "generation";
  }
  return "dialogue";
}

const PromptSection* PromptBundle::Section(std::string_view id) const {
  for (const auto& s : sections) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> PromptBundle::SectionIds() const {
  std::vector<std::string> ids;
  for (const auto& s : sections) ids.push_back(s.id);
  return ids;
}

std::string Interpolate(std::string_view text, const Values& values) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (const auto len = PlaceholderAt(text, i)) {
      auto it = values.find(text.substr(i + 1, len - 2));
      if (it != values.end()) {
        out += it->second;
        i += len;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::optional<std::string> FindPlaceholder(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (const auto len = PlaceholderAt(text, i)) return std::string(text.substr(i + 1, len - 2));
  }
  return std::nullopt;
}

std::string RenderTranscript(const std::vector<ChatTurn>& history) {
  std::string out;
  for (const auto& turn : history) {
    if (!out.empty()) out += '\n';
    out += turn.speaker == Speaker::kUser ? "User: " : "Agent: ";
    for (char c : turn.text) {
      if (c == '\r') continue;
      out.push_back(c);
      if (c == '\n') out += "  ";
    }
  }
  return out;
}

PromptBundle ComposeDialoguePrompt(const SessionState& session, const dialogue::Registry& registry,
                                   const PromptLibrary& library, const DialogueOptions& options) {
  const auto& step = registry.Step(session.current.step);
  const auto& guidance = library.Guidance(step.state, step.name);

  std::string history;
  const auto& turns = session.history;
  if (turns.size() > options.turn_budget) {
    const auto omitted = turns.size() - options.turn_budget;
    std::vector<ChatTurn> kept(turns.end() - static_cast<std::ptrdiff_t>(options.turn_budget), turns.end());
    history = "[" + std::to_string(omitted) + " earlier turns omitted]";
    if (!kept.empty()) history += "\n" + RenderTranscript(kept);
  } else {
    history = RenderTranscript(turns);
  }

  std::string state_guidance = guidance;
  for (const auto& notice : options.notices) state_guidance += "\n" + notice;

  const auto unfilled = Unfilled(step, session.vars);
  const Values values{
      {"user_name", Defang(session.user_name)},
      {"chat_history", Defang(history)},
      {"state", std::string(dialogue::ToString(step.state))},
      {"step", step.name},
      {"state_guidance", Defang(state_guidance)},
      {"required_variables", VariableList(session.vars, unfilled)},
  };
  std::vector<PromptSection> sections;
  for (auto id : kDialogueSectionOrder) {
    const auto& tmpl = library.Get("general." + std::string(id));
    sections.push_back({std::string(id), Interpolate(tmpl, values)});
  }
  return Finish(PromptKind::kDialogue, std::move(sections), StepRef{step.state, step.name}, unfilled);
}

PromptBundle ComposeExtractionPrompt(const SessionState& session, const dialogue::TherapyStep& step,
                                     const PromptLibrary& library) {
  if (step.required_variables.empty()) {
    throw Error(ErrorCode::kContractViolation, "step " + step.name + " has no required variables to extract");
  }
  const auto unfilled = Unfilled(step, session.vars);
  if (unfilled.empty()) {
    throw Error(ErrorCode::kContractViolation, "step " + step.name + " has no unfilled variables");
  }
  const auto& turns = session.history;
  const auto k = std::min(kExtractionContextTurns, turns.size());
  const std::vector<ChatTurn> recent(turns.end() - static_cast<std::ptrdiff_t>(k), turns.end());

  std::string keys;
  std::string schemas;
  for (const auto& id : unfilled) {
    if (!keys.empty()) {
      keys += ", ";
      schemas += '\n';
    }
    keys += "\"" + id + "\"";
    const auto kind = session.vars.at(id).kind;
    const std::string schema_key = "schema." + std::string(dialogue::ToString(kind));
    schemas += Interpolate(library.Get(schema_key), Values{{"variable", id}});
  }
  const Values values{
      {"recent_turns", Defang(RenderTranscript(recent))},
      {"step", step.name},
      {"required_variables", VariableList(session.vars, unfilled)},
      {"output_keys", keys},
      {"structured_schemas", schemas},
  };
  std::vector<PromptSection> sections;
  for (auto id : kExtractionSectionOrder) {
    const auto& tmpl = library.Get("extraction." + std::string(id));
    sections.push_back({std::string(id), Interpolate(tmpl, values)});
  }
  return Finish(PromptKind::kExtraction, std::move(sections), StepRef{step.state, step.name}, unfilled);
}

PromptBundle ComposeLyricsPrompt(const SessionState& session, const dialogue::Registry& registry,
                                 const PromptLibrary& library) {
  std::string inputs;
  for (auto id : kLyricsInputs) {
    if (!session.vars.Contains(id) || !session.vars.IsFilled(id)) continue;
    if (!inputs.empty()) inputs += '\n';
    inputs += "- " + std::string(id) + ": " + ValueText(*session.vars.at(id).value);
  }
  if (!session.artifacts.lyrics_versions.empty()) {
    inputs += "\n- previous_lyrics:\n" + session.artifacts.lyrics_versions.back().full_text;
  }
  if (inputs.empty()) inputs = "(none)";
  const Values values{{"lyrics_inputs", Defang(inputs)}, {"user_name", Defang(session.user_name)}};
  std::vector<PromptSection> sections{
      {"role", Interpolate(library.Get("generation.lyricist"), values)},
      {"inputs", Interpolate(library.Get("generation.inputs"), values)},
      {"output_constraints", Interpolate(library.Get("generation.output_constraints"), values)},
  };
  const auto& step = registry.Step(session.current.step);
  return Finish(PromptKind::kGeneration, std::move(sections), StepRef{step.state, step.name}, {});
}

}  // namespace songcraft::prompt
