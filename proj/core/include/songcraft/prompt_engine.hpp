#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "songcraft/chat.hpp"
#include "songcraft/dialogue_state.hpp"
#include "songcraft/session_state.hpp"

namespace songcraft::prompt {

/// Versioned plain-text prompt library: general template sections,
/// extraction and generation templates, notices and one guidance entry per
/// step (key "guidance <State>/<step>").
class PromptLibrary {
 public:
  /// The shipped library (config/prompt_library.txt, compiled in).
  static const PromptLibrary& Default();
  /// Throws Error(kConfiguration) on malformed text or missing template keys.
  static PromptLibrary Parse(std::string_view text);
  static PromptLibrary FromFile(const std::string& path);

  /// Throws Error(kConfiguration) when the key is absent.
  const std::string& Get(std::string_view key) const;
  const std::string* Find(std::string_view key) const;
  static std::string GuidanceKey(dialogue::TherapyState state, std::string_view step);
  /// Throws Error(kConfiguration) when the step has no guidance entry.
  const std::string& Guidance(dialogue::TherapyState state, std::string_view step) const;

  /// Checks that every registry step has guidance and no guidance entry
  /// names an unknown step.
  void ValidateAgainst(const dialogue::Registry& registry) const;

  /// Copy with one entry replaced or added.
  PromptLibrary WithEntry(std::string key, std::string text) const;

  /// Canonical text form; Parse(Serialize()) reproduces the library.
  std::string Serialize() const;
  /// SHA-256 of Serialize().
  const std::string& checksum() const { return checksum_; }
  const std::string& version() const { return version_; }
  const std::string& language() const { return language_; }
  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  void Finish();

  std::map<std::string, std::string, std::less<>> entries_;
  std::string version_;
  std::string language_;
  std::string checksum_;
};

enum class PromptKind { kDialogue, kExtraction, kGeneration };
std::string_view ToString(PromptKind kind);

struct PromptSection {
  std::string id;
  std::string text;
  bool operator==(const PromptSection&) const = default;
};

struct PromptBundle {
  PromptKind kind = PromptKind::kDialogue;
  std::vector<PromptSection> sections;
  std::string rendered_text;
  std::optional<StepRef> state_ref;
  /// Dialogue: the unfilled variables listed. Extraction: the output keys.
  std::vector<dialogue::VariableId> requested_variables;
  /// SHA-256 of rendered_text.
  std::string digest;
  /// SHA-256 of each section's text, keyed by section id.
  std::map<std::string, std::string> section_digests;

  const PromptSection* Section(std::string_view id) const;
  std::vector<std::string> SectionIds() const;
};

inline constexpr std::string_view kDialogueSectionOrder[] = {
    "role",         "chat_history",       "state_guidance", "required_variables",
    "dialogue_rules", "supportive_empathy", "crisis_rules",   "output_constraints",
};
inline constexpr std::string_view kExtractionSectionOrder[] = {
    "role", "dialogue_rules", "recent_turns", "required_variables", "output_schema",
};
inline constexpr std::string_view kGenerationSectionOrder[] = {"role", "inputs", "output_constraints"};

/// Turns of context given to the extractor.
inline constexpr std::size_t kExtractionContextTurns = 3;
inline constexpr std::size_t kDefaultTurnBudget = 60;

struct DialogueOptions {
  /// Most recent turns kept in the chat-history section; older ones are
  /// replaced by a one-line stub.
  std::size_t turn_budget = kDefaultTurnBudget;
  /// Extra instructions appended to the state-guidance section.
  std::vector<std::string> notices;
};

/// Speaker-tagged transcript, one "Agent: ..." or "User: ..." entry per turn.
/// Continuation lines of multi-line turns are indented by two spaces.
std::string RenderTranscript(const std::vector<ChatTurn>& history);

PromptBundle ComposeDialoguePrompt(const SessionState& session, const dialogue::Registry& registry,
                                   const PromptLibrary& library, const DialogueOptions& options = {});

/// Throws Error(kContractViolation) when `step` has no unfilled variable.
PromptBundle ComposeExtractionPrompt(const SessionState& session, const dialogue::TherapyStep& step,
                                     const PromptLibrary& library);

/// Lyricist prompt built from the lyric-related variables of the session.
PromptBundle ComposeLyricsPrompt(const SessionState& session, const dialogue::Registry& registry,
                                 const PromptLibrary& library);

/// Expands {name} placeholders from `values`; unknown placeholders are left
/// in place. Values are inserted verbatim and never re-expanded.
std::string Interpolate(std::string_view text, const std::map<std::string, std::string, std::less<>>& values);

/// First {identifier} placeholder left in `text`, if any.
std::optional<std::string> FindPlaceholder(std::string_view text);

}  // namespace songcraft::prompt
