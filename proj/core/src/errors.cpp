#include "songcraft/errors.hpp"

namespace songcraft {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRegistry: return "registry";
    case ErrorCode::kContractViolation: return "contract-violation";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kComposition: return "composition";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kBackend: return "backend";
    case ErrorCode::kExtractionFailed: return "extraction-failed";
    case ErrorCode::kScriptedMiss: return "scripted-miss";
    case ErrorCode::kIncompleteComponents: return "incomplete-components";
    case ErrorCode::kInvalidArtifact: return "invalid-artifact";
    case ErrorCode::kFeatureInvalid: return "feature-invalid";
    case ErrorCode::kDegenerateTiming: return "degenerate-timing";
    case ErrorCode::kLyricsFormat: return "lyrics-format";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kBusy: return "busy";
    case ErrorCode::kSessionEnded: return "session-ended";
    case ErrorCode::kPersistence: return "persistence";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message), code_(code) {}

ExtractionFailed::ExtractionFailed(const std::string& message, std::string raw_backend_text)
    : Error(ErrorCode::kExtractionFailed, message), raw_(std::move(raw_backend_text)) {}

ScriptedMiss::ScriptedMiss(const std::string& message, std::string digest,
                           std::vector<std::string> changed_sections)
    : Error(ErrorCode::kScriptedMiss, message),
      digest_(std::move(digest)),
      changed_(std::move(changed_sections)) {}

namespace {
std::string JoinMissing(const std::vector<std::string>& missing) {
  std::string out = "expressiveness floor unmet, missing one of: ";
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (i) out += ", ";
    out += missing[i];
  }
  return out;
}
}  // namespace

IncompleteComponents::IncompleteComponents(std::vector<std::string> missing)
    : Error(ErrorCode::kIncompleteComponents, JoinMissing(missing)), missing_(std::move(missing)) {}

}  // namespace songcraft
