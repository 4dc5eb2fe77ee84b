#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace songcraft::music {

/// Upper bound on the rendered style prompt, inclusive.
inline constexpr std::size_t kMaxStylePromptChars = 150;

/// Musical choices elicited in the making-music step.
struct MusicComponents {
  std::optional<std::string> genre;
  std::optional<std::string> tempo;
  std::vector<std::string> instrumentation;
  std::optional<std::string> mood;
  std::optional<std::string> vocal_tone;
  std::optional<std::string> dynamics;
  std::optional<std::string> rhythm;

  bool operator==(const MusicComponents&) const = default;
};

/// Keyword-based, comma-separated prompt for the music generator.
struct StylePrompt {
  std::vector<std::string> keywords;
  std::string rendered_text;

  bool operator==(const StylePrompt&) const = default;
};

/// Assembles keywords in priority order genre, mood, tempo, dynamics, rhythm,
/// vocal tone, instrumentation; drops from the tail until the rendering fits.
StylePrompt BuildStylePrompt(const MusicComponents& components);

/// Checks every StylePrompt invariant; returns a reason when one fails.
std::optional<std::string> ValidateStylePrompt(const StylePrompt& prompt);

/// Classifies free-text music ideas ("slow piano ballad, soft vocals, ...")
/// into components with a small keyword lexicon. Clauses that match no
/// category become the mood.
MusicComponents ParseMusicComponents(std::string_view text);

enum class SectionKind { kVerse, kChorus, kBridge };
std::string_view ToString(SectionKind kind);

struct LyricsSection {
  SectionKind kind = SectionKind::kVerse;
  std::vector<std::string> lines;
  bool operator==(const LyricsSection&) const = default;
};

struct LyricsDocument {
  std::vector<LyricsSection> sections;
  std::string full_text;

  /// All lyric lines, section labels excluded, joined by newlines.
  std::string LyricLines() const;
  bool operator==(const LyricsDocument&) const = default;
};

/// Parses "[Verse]\n...\n[Chorus]\n..." text. Throws Error(kLyricsFormat)
/// unless at least one verse and one chorus are present.
LyricsDocument ParseLyricsDocument(std::string_view text);
LyricsDocument LyricsFromSections(std::vector<LyricsSection> sections);

struct SongArtifact {
  std::string song_id;
  std::string audio_ref;
  std::int64_t duration_ms = 0;
  std::string style_echo;
  bool operator==(const SongArtifact&) const = default;
};

struct TranscriptToken {
  std::string token;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  bool operator==(const TranscriptToken&) const = default;
};

struct PitchSample {
  std::int64_t time_ms = 0;
  double pitch_hz = 0;
  bool operator==(const PitchSample&) const = default;
};

struct LoudnessSample {
  std::int64_t time_ms = 0;
  double level = 0;
  bool operator==(const LoudnessSample&) const = default;
};

struct Beat {
  std::int64_t time_ms = 0;
  double strength = 0;
  bool operator==(const Beat&) const = default;
};

struct MoodLabel {
  std::string label;
  double confidence = 0;
  bool operator==(const MoodLabel&) const = default;
};

/// Analysis backend output for one song.
struct AnalysisFeatures {
  std::vector<TranscriptToken> predicted_transcript;
  std::vector<PitchSample> pitch_contour;
  std::vector<LoudnessSample> loudness_envelope;
  std::vector<Beat> beats;
  std::vector<MoodLabel> mood_labels;
  std::vector<std::string> instruments;
  /// Set when the transcript is empty (an instrumental track).
  bool instrumental = false;

  bool operator==(const AnalysisFeatures&) const = default;
};

inline constexpr std::string_view kFeatureFormat = "songcraft-features";
inline constexpr int kFeatureVersion = 1;

/// Validates a raw feature document. Out-of-range levels, strengths and
/// confidences are clamped to [0,1] with a warning; unsorted series,
/// overlapping transcript intervals and non-positive pitches throw
/// Error(kFeatureInvalid).
AnalysisFeatures IngestFeatures(std::string_view document,
                                std::vector<std::string>* warnings = nullptr);
std::string SerializeFeatures(const AnalysisFeatures& features);

struct SongRequest {
  std::string lyrics_text;
  std::string style_text;
  int ordinal = 1;  // 1-based song number within the session
};

class MusicBackend {
 public:
  virtual ~MusicBackend() = default;
  virtual SongArtifact Generate(const SongRequest& request) = 0;
};

class AnalysisBackend {
 public:
  virtual ~AnalysisBackend() = default;
  /// Returns the raw feature document for the song.
  virtual std::string Analyze(const SongArtifact& song) = 0;
};

/// Offline generator and analyzer backed by a fixture catalog
/// (`catalog.json` plus companion feature documents). Song n is served from
/// catalog entry (n-1) mod size and named "fx-" + zero-padded n.
class FixtureMusicBackend : public MusicBackend, public AnalysisBackend {
 public:
  explicit FixtureMusicBackend(std::filesystem::path fixture_dir);

  SongArtifact Generate(const SongRequest& request) override;
  std::string Analyze(const SongArtifact& song) override;

 private:
  struct Entry {
    std::string audio_ref;
    std::int64_t duration_ms = 0;
    std::filesystem::path features;
  };
  const Entry& EntryFor(int ordinal) const;

  std::filesystem::path dir_;
  std::vector<Entry> entries_;
};

/// Sends finalized lyrics and a style prompt to the generator and validates
/// the artifact it returns.
SongArtifact RequestSong(MusicBackend& backend, const LyricsDocument& lyrics,
                         const StylePrompt& style, int ordinal);

}  // namespace songcraft::music
