#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "songcraft/dialogue_state.hpp"

namespace songcraft {

enum class Speaker { kUser, kAgent };

std::string_view ToString(Speaker speaker);

/// A (state, step) position in the therapy process.
struct StepRef {
  dialogue::TherapyState state = dialogue::TherapyState::kTherapeuticConnection;
  std::string step;
  bool operator==(const StepRef&) const = default;
};

struct ChatTurn {
  int index = 0;
  Speaker speaker = Speaker::kAgent;
  std::string text;
  std::vector<std::string> option_chips;
  StepRef state_at;
  bool crisis_flagged = false;
  /// A user turn whose processing failed and awaits a retry.
  bool pending_retry = false;
  bool operator==(const ChatTurn&) const = default;
};

}  // namespace songcraft
