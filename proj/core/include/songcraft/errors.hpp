#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace songcraft {

enum class ErrorCode {
  kRegistry,
  kContractViolation,
  kConfiguration,
  kComposition,
  kTransport,
  kBackend,
  kExtractionFailed,
  kScriptedMiss,
  kIncompleteComponents,
  kInvalidArtifact,
  kFeatureInvalid,
  kDegenerateTiming,
  kLyricsFormat,
  kNotFound,
  kBusy,
  kSessionEnded,
  kPersistence,
  kParse,
};

std::string_view ToString(ErrorCode code);

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Transport-level failures may be retried by the caller; nothing else is.
  bool retryable() const noexcept { return code_ == ErrorCode::kTransport; }

 private:
  ErrorCode code_;
};

class ExtractionFailed : public Error {
 public:
  ExtractionFailed(const std::string& message, std::string raw_backend_text);
  const std::string& raw_backend_text() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class ScriptedMiss : public Error {
 public:
  ScriptedMiss(const std::string& message, std::string digest,
               std::vector<std::string> changed_sections);
  const std::string& digest() const noexcept { return digest_; }
  const std::vector<std::string>& changed_sections() const noexcept { return changed_; }

 private:
  std::string digest_;
  std::vector<std::string> changed_;
};

class IncompleteComponents : public Error {
 public:
  explicit IncompleteComponents(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace songcraft
