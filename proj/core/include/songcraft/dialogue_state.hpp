#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace songcraft::dialogue {

/// The four therapy states; declaration order is the forward order.
enum class TherapyState {
  kTherapeuticConnection,
  kMakingLyrics,
  kMakingMusic,
  kSongDiscussion,
};

inline constexpr std::array<TherapyState, 4> kAllStates{
    TherapyState::kTherapeuticConnection,
    TherapyState::kMakingLyrics,
    TherapyState::kMakingMusic,
    TherapyState::kSongDiscussion,
};

std::string_view ToString(TherapyState state);
std::optional<TherapyState> ParseTherapyState(std::string_view text);
inline int Ordinal(TherapyState state) { return static_cast<int>(state); }

using VariableId = std::string;

// System action identifiers attached to steps.
inline constexpr std::string_view kGenerateLyrics = "generate_lyrics";
inline constexpr std::string_view kGenerateStylePrompt = "generate_style_prompt";
inline constexpr std::string_view kGenerateMusic = "generate_music";

// Steps and variables the transition rules refer to by name.
inline constexpr std::string_view kLyricsDiscussionStep = "lyrics_discussion";
inline constexpr std::string_view kMakingLyricsStep = "making_lyrics";
inline constexpr std::string_view kMakingMusicStep = "making_music";
inline constexpr std::string_view kRevisingMusicStep = "revising_music";
inline constexpr std::string_view kSelfExplorationStep = "musical_self_exploration";
inline constexpr std::string_view kLyricsFlagVar = "lyrics_flag";
inline constexpr std::string_view kMusicRecreationVar = "music_recreation";

struct TherapyStep {
  TherapyState state{};
  std::string name;
  int ordinal = 0;  // position within its state
  std::vector<VariableId> required_variables;
  std::vector<std::string> system_actions;

  bool HasAction(std::string_view action) const;
};

/// Structured value of `lyrics_flag`.
struct LyricsFlag {
  bool change_needed = false;
  bool operator==(const LyricsFlag&) const = default;
};

/// Structured value of `music_recreation`.
struct MusicRecreation {
  bool revise_lyrics = false;
  bool revise_music = false;
  std::string notes;
  bool operator==(const MusicRecreation&) const = default;
};

using VariableValue = std::variant<std::string, LyricsFlag, MusicRecreation>;

enum class VariableKind { kText, kLyricsFlag, kMusicRecreation };
std::string_view ToString(VariableKind kind);

enum class FillStatus { kUnfilled, kFilled };

struct VariableEntry {
  std::string description;
  VariableKind kind = VariableKind::kText;
  FillStatus status = FillStatus::kUnfilled;
  std::optional<VariableValue> value;
  std::optional<int> filled_at_turn;

  bool filled() const { return status == FillStatus::kFilled; }
  bool operator==(const VariableEntry&) const = default;
};

nlohmann::ordered_json ValueToJson(const VariableValue& value);
/// Parses a value of the given kind; returns nullopt when it does not fit the schema.
std::optional<VariableValue> ValueFromJson(VariableKind kind, const nlohmann::json& json);

/// The store of required variables, keyed by id.
class RequiredVariableSet {
 public:
  RequiredVariableSet() = default;

  bool Contains(std::string_view id) const;
  const VariableEntry& at(std::string_view id) const;
  bool IsFilled(std::string_view id) const;

  void Declare(VariableId id, std::string description, VariableKind kind);
  void Fill(std::string_view id, VariableValue value, int turn_index);
  void Reset(std::string_view id);

  std::size_t size() const { return entries_.size(); }
  const std::map<VariableId, VariableEntry, std::less<>>& entries() const { return entries_; }

  bool operator==(const RequiredVariableSet&) const = default;

 private:
  VariableEntry& Mutable(std::string_view id);
  std::map<VariableId, VariableEntry, std::less<>> entries_;
};

struct VariableDefinition {
  VariableId id;
  std::string description;
  VariableKind kind = VariableKind::kText;
};

/// States, steps and variables as loaded from a registry document. The
/// four-state shape is fixed; steps and variables are data.
class Registry {
 public:
  /// The shipped default table (config/registry.json, compiled in).
  static const Registry& Default();
  static Registry FromJson(const nlohmann::json& document);
  static Registry FromFile(const std::string& path);

  nlohmann::ordered_json ToJson() const;

  const std::vector<TherapyStep>& steps() const { return steps_; }
  const std::vector<VariableDefinition>& variables() const { return variables_; }

  /// Throws Error(kRegistry) for an unknown step name.
  const TherapyStep& Step(std::string_view name) const;
  const TherapyStep& FirstStep(TherapyState state) const;
  std::vector<const TherapyStep*> StepsOf(TherapyState state) const;
  /// The following step in the same state, or nullptr if `step` is last.
  const TherapyStep* NextStepInState(const TherapyStep& step) const;
  /// Position of the step in the global forward order.
  int GlobalIndex(const TherapyStep& step) const;

  const VariableDefinition& Variable(std::string_view id) const;
  TherapyState OwnerState(std::string_view variable_id) const;
  const TherapyStep& OwnerStep(std::string_view variable_id) const;

  /// A variable set declaring every registry variable as unfilled.
  RequiredVariableSet EmptyVariableSet() const;

 private:
  void Validate() const;

  std::vector<TherapyStep> steps_;
  std::vector<VariableDefinition> variables_;
};

/// True iff every required variable of `step` is filled. Throws
/// Error(kRegistry) if `vars` lacks one of the step's variables.
bool CheckStepComplete(const TherapyStep& step, const RequiredVariableSet& vars);

/// Registry-checked variant: unknown step names raise a registry error.
bool CheckStepComplete(const Registry& registry, std::string_view step_name,
                       const RequiredVariableSet& vars);

}  // namespace songcraft::dialogue
