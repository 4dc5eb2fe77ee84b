#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "songcraft/chat.hpp"
#include "songcraft/dialogue_state.hpp"
#include "songcraft/prompt_engine.hpp"

namespace songcraft::gateway {

struct BackendRequest {
  prompt::PromptKind kind = prompt::PromptKind::kDialogue;
  std::string prompt_text;
  std::string digest;
  std::map<std::string, std::string> section_digests;
  /// Position of this call within its session, starting at 0.
  std::uint64_t call_index = 0;
};

/// A chat-completion backend. Implementations throw Error(kTransport) for
/// failures worth retrying and Error(kBackend) for anything else.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string Complete(const BackendRequest& request) = 0;
};

/// Removes leading timestamps and "bot:"/"assistant:" tags from every line.
/// Idempotent.
std::string Sanitize(std::string_view reply);

/// Candidate answers offered after an example marker ("For example", "e.g.",
/// "such as", "for instance"): quoted items, a bullet list, or a comma list.
std::vector<std::string> ParseOptionChips(std::string_view reply);

const std::vector<std::string>& DefaultCrisisLexicon();
bool MatchesCrisisLexicon(std::string_view text, const std::vector<std::string>& lexicon);

struct ExtractionResult {
  std::map<dialogue::VariableId, dialogue::VariableValue> values;
  std::string raw_backend_text;
  std::vector<std::string> warnings;
};

/// Sentence-terminal runs (".", "!", "?", "..." counts once).
std::size_t CountSentenceMarks(std::string_view text);
/// A lyrics_sentence value needs at least this many sentences.
inline constexpr std::size_t kMinLyricsSentences = 3;

/// Parses an extraction reply against the requested keys. Throws
/// ExtractionFailed when the reply holds no JSON object.
ExtractionResult ParseExtraction(std::string_view raw, const std::vector<dialogue::VariableId>& requested,
                                 const dialogue::RequiredVariableSet& schema);

struct GatewayOptions {
  int max_retries = 2;
  std::chrono::milliseconds base_backoff{200};
  std::vector<std::string> crisis_lexicon = DefaultCrisisLexicon();
};

class Gateway {
 public:
  explicit Gateway(ChatBackend& backend, GatewayOptions options = {});

  /// Agent turn built from the sanitized reply. Index is left at 0 for the
  /// caller to assign.
  ChatTurn CompleteDialogue(const prompt::PromptBundle& bundle, std::uint64_t call_index,
                            std::vector<std::string>* warnings = nullptr);
  ExtractionResult ExtractVariables(const prompt::PromptBundle& bundle, const dialogue::TherapyStep& step,
                                    const dialogue::RequiredVariableSet& vars, std::uint64_t call_index);
  /// Raw completion for generation prompts (sanitized).
  std::string Generate(const prompt::PromptBundle& bundle, std::uint64_t call_index);

  const GatewayOptions& options() const { return options_; }

 private:
  std::string Call(const prompt::PromptBundle& bundle, std::uint64_t call_index);

  ChatBackend& backend_;
  GatewayOptions options_;
};

// --- Scripted backend ---------------------------------------------------------------

inline constexpr std::string_view kReplayScriptFormat = "songcraft-replay-script";
inline constexpr int kReplayScriptVersion = 1;

struct ScriptEntry {
  std::optional<std::uint64_t> call;
  prompt::PromptKind kind = prompt::PromptKind::kDialogue;
  std::string reply;
  /// When set, the prompt must have this digest.
  std::optional<std::string> digest;
  /// Section digests of the pinned prompt, used to name what changed.
  std::map<std::string, std::string> sections;
  bool operator==(const ScriptEntry&) const = default;
};

/// Canned replies keyed by call index or by prompt digest.
struct ReplayScript {
  std::vector<ScriptEntry> entries;

  static ReplayScript FromJson(const nlohmann::json& document);
  static ReplayScript FromFile(const std::filesystem::path& path);
  nlohmann::ordered_json ToJson() const;
  bool operator==(const ReplayScript&) const = default;
};

/// Deterministic backend: a request is answered by the entry pinned to its
/// digest, else by the entry for its call index. Unknown prompts and pinned
/// entries whose digest changed raise ScriptedMiss.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(ReplayScript script);
  std::string Complete(const BackendRequest& request) override;

 private:
  ReplayScript script_;
  std::map<std::uint64_t, std::size_t> by_call_;
  std::map<std::string, std::size_t, std::less<>> by_digest_;
};

/// Wraps a backend and records every exchange as a pinned script entry.
class RecordingBackend : public ChatBackend {
 public:
  explicit RecordingBackend(ChatBackend& inner) : inner_(inner) {}
  std::string Complete(const BackendRequest& request) override;
  ReplayScript script() const;

 private:
  ChatBackend& inner_;
  mutable std::mutex mutex_;
  ReplayScript script_;
};

// --- Live backend -------------------------------------------------------------------

struct HttpBackendConfig {
  /// Base URL; requests go to {endpoint}/chat/completions.
  std::string endpoint;
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  std::chrono::seconds timeout{60};
};

/// OpenAI-style chat-completion client. The composed prompt is sent as the
/// system message.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);
  std::string Complete(const BackendRequest& request) override;

 private:
  HttpBackendConfig config_;
};

}  // namespace songcraft::gateway
