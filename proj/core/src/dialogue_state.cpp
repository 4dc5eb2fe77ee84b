#include "songcraft/dialogue_state.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded_config.hpp"
#include "songcraft/errors.hpp"

namespace songcraft::dialogue {

namespace {

constexpr std::array<std::string_view, 4> kStateNames{
    "TherapeuticConnection", "MakingLyrics", "MakingMusic", "SongDiscussion"};

std::optional<VariableKind> ParseKind(std::string_view text) {
  if (text == "text") return VariableKind::kText;
  if (text == "lyrics_flag") return VariableKind::kLyricsFlag;
  if (text == "music_recreation") return VariableKind::kMusicRecreation;
  return std::nullopt;
}

[[noreturn]] void RegistryError(const std::string& message) {
  throw Error(ErrorCode::kRegistry, message);
}

}  // namespace

std::string_view ToString(TherapyState state) {
  return kStateNames.at(static_cast<std::size_t>(state));
}

std::optional<TherapyState> ParseTherapyState(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) return static_cast<TherapyState>(i);
  }
  return std::nullopt;
}

std::string_view ToString(VariableKind kind) {
  switch (kind) {
    case VariableKind::kText: return "text";
    case VariableKind::kLyricsFlag: return "lyrics_flag";
    case VariableKind::kMusicRecreation: return "music_recreation";
  }
  return "text";
}

bool TherapyStep::HasAction(std::string_view action) const {
  return std::find(system_actions.begin(), system_actions.end(), action) != system_actions.end();
}

nlohmann::ordered_json ValueToJson(const VariableValue& value) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, LyricsFlag>) {
          return {{"changeNeeded", v.change_needed}};
        } else {
          return {{"reviseLyrics", v.revise_lyrics},
                  {"reviseMusic", v.revise_music},
                  {"notes", v.notes}};
        }
      },
      value);
}

std::optional<VariableValue> ValueFromJson(VariableKind kind, const nlohmann::json& json) {
  switch (kind) {
    case VariableKind::kText:
      if (json.is_string()) return VariableValue{json.get<std::string>()};
      return std::nullopt;
    case VariableKind::kLyricsFlag:
      if (json.is_boolean()) return VariableValue{LyricsFlag{json.get<bool>()}};
      if (json.is_object() && json.contains("changeNeeded") && json["changeNeeded"].is_boolean()) {
        return VariableValue{LyricsFlag{json["changeNeeded"].get<bool>()}};
      }
      return std::nullopt;
    case VariableKind::kMusicRecreation: {
      if (!json.is_object()) return std::nullopt;
      auto flag = [&](const char* key) -> std::optional<bool> {
        auto it = json.find(key);
        if (it == json.end() || !it->is_boolean()) return std::nullopt;
        return it->get<bool>();
      };
      auto lyrics = flag("reviseLyrics");
      auto music = flag("reviseMusic");
      if (!lyrics || !music) return std::nullopt;
      MusicRecreation out{*lyrics, *music, {}};
      if (auto it = json.find("notes"); it != json.end()) {
        if (it->is_string()) {
          out.notes = it->get<std::string>();
        } else if (!it->is_null()) {
          return std::nullopt;
        }
      }
      return VariableValue{std::move(out)};
    }
  }
  return std::nullopt;
}

// --- RequiredVariableSet ----------------------------------------------------

bool RequiredVariableSet::Contains(std::string_view id) const {
  return entries_.find(id) != entries_.end();
}

const VariableEntry& RequiredVariableSet::at(std::string_view id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) RegistryError("unknown variable '" + std::string(id) + "'");
  return it->second;
}

bool RequiredVariableSet::IsFilled(std::string_view id) const { return at(id).filled(); }

void RequiredVariableSet::Declare(VariableId id, std::string description, VariableKind kind) {
  VariableEntry entry;
  entry.description = std::move(description);
  entry.kind = kind;
  entries_.insert_or_assign(std::move(id), std::move(entry));
}

VariableEntry& RequiredVariableSet::Mutable(std::string_view id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) RegistryError("unknown variable '" + std::string(id) + "'");
  return it->second;
}

void RequiredVariableSet::Fill(std::string_view id, VariableValue value, int turn_index) {
  VariableEntry& entry = Mutable(id);
  entry.status = FillStatus::kFilled;
  entry.value = std::move(value);
  entry.filled_at_turn = turn_index;
}

void RequiredVariableSet::Reset(std::string_view id) {
  VariableEntry& entry = Mutable(id);
  entry.status = FillStatus::kUnfilled;
  entry.value.reset();
  entry.filled_at_turn.reset();
}

// --- Registry -----------------------------------------------------------------

const Registry& Registry::Default() {
  static const Registry registry =
      FromJson(nlohmann::json::parse(embedded::RegistryDocument()));
  return registry;
}

Registry Registry::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot open registry document " + path);
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

Registry Registry::FromJson(const nlohmann::json& document) {
  Registry registry;
  try {
    if (document.value("format", "") != "songcraft-registry") {
      RegistryError("document format is not songcraft-registry");
    }
    const auto& states = document.at("states");
    if (!states.is_array() || states.size() != kAllStates.size()) {
      RegistryError("registry must define exactly the four therapy states");
    }
    for (std::size_t s = 0; s < states.size(); ++s) {
      const auto& state_doc = states[s];
      auto state = ParseTherapyState(state_doc.at("state").get<std::string>());
      if (!state || *state != kAllStates[s]) {
        RegistryError("state #" + std::to_string(s) + " must be " + std::string(kStateNames[s]));
      }
      const auto& steps = state_doc.at("steps");
      if (!steps.is_array() || steps.empty()) {
        RegistryError(std::string(kStateNames[s]) + " has no steps");
      }
      int ordinal = 0;
      for (const auto& step_doc : steps) {
        TherapyStep step;
        step.state = *state;
        step.name = step_doc.at("name").get<std::string>();
        step.ordinal = ordinal++;
        step.required_variables = step_doc.at("requiredVariables").get<std::vector<std::string>>();
        step.system_actions =
            step_doc.value("systemActions", std::vector<std::string>{});
        registry.steps_.push_back(std::move(step));
      }
    }
    for (const auto& var_doc : document.at("variables")) {
      VariableDefinition def;
      def.id = var_doc.at("id").get<std::string>();
      def.description = var_doc.at("description").get<std::string>();
      auto kind = ParseKind(var_doc.value("kind", "text"));
      if (!kind) RegistryError("variable " + def.id + " has an unknown kind");
      def.kind = *kind;
      registry.variables_.push_back(std::move(def));
    }
  } catch (const nlohmann::json::exception& e) {
    RegistryError(std::string("malformed registry document: ") + e.what());
  }
  registry.Validate();
  return registry;
}

void Registry::Validate() const {
  std::set<std::string, std::less<>> step_names;
  for (const auto& step : steps_) {
    if (!step_names.insert(step.name).second) RegistryError("duplicate step " + step.name);
  }
  std::set<std::string, std::less<>> var_ids;
  for (const auto& var : variables_) {
    if (var.description.empty()) RegistryError("variable " + var.id + " has no description");
    if (!var_ids.insert(var.id).second) RegistryError("duplicate variable " + var.id);
  }
  std::map<std::string, int, std::less<>> owners;
  for (const auto& step : steps_) {
    for (const auto& id : step.required_variables) {
      if (!var_ids.contains(id)) RegistryError("step " + step.name + " requires undeclared " + id);
      if (++owners[id] > 1) RegistryError("variable " + id + " is required by more than one step");
    }
  }
  for (const auto& id : var_ids) {
    if (!owners.contains(id)) RegistryError("variable " + id + " is not required by any step");
  }
  // The transition rules depend on these steps and structured variables.
  auto require_step_var = [&](std::string_view step, std::string_view var, VariableKind kind) {
    if (!step_names.contains(step)) RegistryError("missing step " + std::string(step));
    const auto& s = Step(step);
    if (std::find(s.required_variables.begin(), s.required_variables.end(), var) ==
        s.required_variables.end()) {
      RegistryError("step " + std::string(step) + " must require " + std::string(var));
    }
    if (Variable(var).kind != kind) RegistryError(std::string(var) + " has the wrong kind");
  };
  require_step_var(kLyricsDiscussionStep, kLyricsFlagVar, VariableKind::kLyricsFlag);
  require_step_var(kRevisingMusicStep, kMusicRecreationVar, VariableKind::kMusicRecreation);
  for (auto step : {kMakingLyricsStep, kMakingMusicStep, kSelfExplorationStep}) {
    if (!step_names.contains(step)) RegistryError("missing step " + std::string(step));
  }
  if (Step(kLyricsDiscussionStep).state != TherapyState::kMakingLyrics ||
      Step(kMakingLyricsStep).state != TherapyState::kMakingLyrics ||
      Step(kMakingMusicStep).state != TherapyState::kMakingMusic ||
      Step(kRevisingMusicStep).state != TherapyState::kSongDiscussion ||
      Step(kSelfExplorationStep).state != TherapyState::kSongDiscussion) {
    RegistryError("named steps are attached to the wrong states");
  }
  if (&steps_.back() != &Step(kSelfExplorationStep)) {
    RegistryError("musical_self_exploration must be the final step");
  }
}

nlohmann::ordered_json Registry::ToJson() const {
  nlohmann::ordered_json doc;
  doc["format"] = "songcraft-registry";
  doc["version"] = 1;
  auto states = nlohmann::ordered_json::array();
  for (auto state : kAllStates) {
    nlohmann::ordered_json state_doc;
    state_doc["state"] = ToString(state);
    auto steps = nlohmann::ordered_json::array();
    for (const auto* step : StepsOf(state)) {
      nlohmann::ordered_json step_doc;
      step_doc["name"] = step->name;
      step_doc["requiredVariables"] = step->required_variables;
      step_doc["systemActions"] = step->system_actions;
      steps.push_back(std::move(step_doc));
    }
    state_doc["steps"] = std::move(steps);
    states.push_back(std::move(state_doc));
  }
  doc["states"] = std::move(states);
  auto vars = nlohmann::ordered_json::array();
  for (const auto& var : variables_) {
    vars.push_back({{"id", var.id}, {"kind", ToString(var.kind)}, {"description", var.description}});
  }
  doc["variables"] = std::move(vars);
  return doc;
}

const TherapyStep& Registry::Step(std::string_view name) const {
  for (const auto& step : steps_) {
    if (step.name == name) return step;
  }
  RegistryError("unknown step '" + std::string(name) + "'");
}

const TherapyStep& Registry::FirstStep(TherapyState state) const {
  for (const auto& step : steps_) {
    if (step.state == state) return step;
  }
  RegistryError("state has no steps");
}

std::vector<const TherapyStep*> Registry::StepsOf(TherapyState state) const {
  std::vector<const TherapyStep*> out;
  for (const auto& step : steps_) {
    if (step.state == state) out.push_back(&step);
  }
  return out;
}

const TherapyStep* Registry::NextStepInState(const TherapyStep& step) const {
  const int index = GlobalIndex(step);
  if (index + 1 < static_cast<int>(steps_.size()) && steps_[index + 1].state == step.state) {
    return &steps_[index + 1];
  }
  return nullptr;
}

int Registry::GlobalIndex(const TherapyStep& step) const {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].name == step.name) return static_cast<int>(i);
  }
  RegistryError("step '" + step.name + "' is not registered");
}

const VariableDefinition& Registry::Variable(std::string_view id) const {
  for (const auto& var : variables_) {
    if (var.id == id) return var;
  }
  RegistryError("unknown variable '" + std::string(id) + "'");
}

const TherapyStep& Registry::OwnerStep(std::string_view variable_id) const {
  for (const auto& step : steps_) {
    for (const auto& id : step.required_variables) {
      if (id == variable_id) return step;
    }
  }
  RegistryError("variable '" + std::string(variable_id) + "' has no owning step");
}

TherapyState Registry::OwnerState(std::string_view variable_id) const {
  return OwnerStep(variable_id).state;
}

RequiredVariableSet Registry::EmptyVariableSet() const {
  RequiredVariableSet set;
  for (const auto& var : variables_) set.Declare(var.id, var.description, var.kind);
  return set;
}

bool CheckStepComplete(const TherapyStep& step, const RequiredVariableSet& vars) {
  bool complete = true;
  for (const auto& id : step.required_variables) {
    complete = vars.IsFilled(id) && complete;  // at() validates every id
  }
  return complete;
}

bool CheckStepComplete(const Registry& registry, std::string_view step_name,
                       const RequiredVariableSet& vars) {
  return CheckStepComplete(registry.Step(step_name), vars);
}

}  // namespace songcraft::dialogue
