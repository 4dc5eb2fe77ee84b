#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "songcraft/lyric_alignment.hpp"
#include "songcraft/music_pipeline.hpp"

namespace songcraft::viz {

inline constexpr std::string_view kVizScriptVersion = "songcraft-viz/1";

struct MoodStyle {
  std::string color_hex;
  std::string font_style_class;
  bool operator==(const MoodStyle&) const = default;
};

/// Mood taxonomy with one visual style per mood.
class MoodStyleTable {
 public:
  /// The shipped table (config/mood_table.json, compiled in).
  static const MoodStyleTable& Default();
  static MoodStyleTable FromJson(const nlohmann::json& document);
  static MoodStyleTable FromFile(const std::string& path);

  /// Throws Error(kConfiguration) for a mood outside the taxonomy.
  const MoodStyle& Lookup(std::string_view mood) const;
  bool Contains(std::string_view mood) const;
  /// Used when the analysis reports no mood labels.
  const std::string& default_mood() const { return default_mood_; }
  const std::map<std::string, MoodStyle, std::less<>>& styles() const { return styles_; }

 private:
  std::map<std::string, MoodStyle, std::less<>> styles_;
  std::string default_mood_;
};

struct LyricEvent {
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  double y_norm = 0.5;
  double size_norm = 0.5;
  std::string mood_class;
  std::string color_hex;
  std::string font_style_class;
  bool operator==(const LyricEvent&) const = default;
};

struct BeatEvent {
  std::int64_t time_ms = 0;
  double intensity_norm = 0;
  bool operator==(const BeatEvent&) const = default;
};

struct MoodSummary {
  std::string dominant_mood;
  double confidence = 0;
  bool operator==(const MoodSummary&) const = default;
};

/// Timed visualization script consumed by the appreciation panel.
struct VizScript {
  std::string version{kVizScriptVersion};
  std::int64_t duration_ms = 0;
  std::vector<LyricEvent> lyric_events;
  std::vector<BeatEvent> beat_events;
  std::optional<MoodSummary> mood_summary;
  bool operator==(const VizScript&) const = default;
};

/// Highest-confidence label; ties go to the lexicographically first label.
std::optional<MoodSummary> DominantMood(const std::vector<music::MoodLabel>& labels);

/// Maps features onto visual channels: mean pitch over each token's
/// interval to vertical position, mean loudness to size, the song's dominant
/// mood to color and font style, beats to squares.
VizScript Compile(const alignment::TimedLyrics& timed, const music::AnalysisFeatures& features,
                  const MoodStyleTable& moods, std::int64_t duration_ms,
                  std::vector<std::string>* warnings = nullptr);

/// Canonical document: fixed key order, one event per line, integer times
/// and 6-decimal norms. Equal scripts serialize byte-identically.
std::string SerializeScript(const VizScript& script);
/// Throws Error(kParse) on malformed input and Error(kContractViolation) on
/// an unsupported version.
VizScript ParseScript(std::string_view document);

}  // namespace songcraft::viz
