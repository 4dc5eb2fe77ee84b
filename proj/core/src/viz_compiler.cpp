#include "songcraft/viz_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <limits>

#include "embedded_config.hpp"
#include "songcraft/errors.hpp"
#include "text_util.hpp"

namespace songcraft::viz {

namespace {

/// Mean of the samples inside [start, end); falls back to the sample closest
/// to the interval midpoint (earlier sample on ties).
template <typename Sample, typename Value>
double IntervalMean(const std::vector<Sample>& samples, std::int64_t start, std::int64_t end,
                    Value value) {
  double sum = 0;
  std::size_t count = 0;
  auto first = std::lower_bound(samples.begin(), samples.end(), start,
                                [](const Sample& s, std::int64_t t) { return s.time_ms < t; });
  for (auto it = first; it != samples.end() && it->time_ms < end; ++it) {
    sum += value(*it);
    ++count;
  }
  if (count) return sum / static_cast<double>(count);
  const std::int64_t twice_mid = start + end;
  const Sample* nearest = nullptr;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : samples) {
    const std::int64_t d = std::abs(2 * s.time_ms - twice_mid);
    if (d < best) {
      best = d;
      nearest = &s;
    }
  }
  return value(*nearest);
}

// Norms are kept at wire precision so a parsed script equals the compiled one.
double Round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string Quote(const std::string& s) {
  return nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string Fixed6(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

// --- MoodStyleTable -------------------------------------------------------------

const MoodStyleTable& MoodStyleTable::Default() {
  static const MoodStyleTable table = FromJson(nlohmann::json::parse(embedded::MoodTableDocument()));
  return table;
}

MoodStyleTable MoodStyleTable::FromJson(const nlohmann::json& document) {
  MoodStyleTable table;
  try {
    if (document.value("format", "") != "songcraft-mood-table") {
      throw Error(ErrorCode::kConfiguration, "document format is not songcraft-mood-table");
    }
    for (const auto& row : document.at("moods")) {
      const std::string mood = text::Lower(row.at("mood").get<std::string>());
      MoodStyle style{row.at("colorHex").get<std::string>(), row.at("fontStyleClass").get<std::string>()};
      if (style.color_hex.size() != 7 || style.color_hex[0] != '#') {
        throw Error(ErrorCode::kConfiguration, "mood " + mood + " has a malformed colorHex");
      }
      if (!table.styles_.emplace(mood, std::move(style)).second) {
        throw Error(ErrorCode::kConfiguration, "duplicate mood " + mood);
      }
    }
    table.default_mood_ = text::Lower(document.at("defaultMood").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("malformed mood table: ") + e.what());
  }
  if (!table.Contains(table.default_mood_)) {
    throw Error(ErrorCode::kConfiguration, "default mood is not in the table");
  }
  return table;
}

MoodStyleTable MoodStyleTable::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot open mood table " + path);
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

bool MoodStyleTable::Contains(std::string_view mood) const { return styles_.find(mood) != styles_.end(); }

const MoodStyle& MoodStyleTable::Lookup(std::string_view mood) const {
  auto it = styles_.find(mood);
  if (it == styles_.end()) {
    throw Error(ErrorCode::kConfiguration, "mood '" + std::string(mood) + "' is not in the mood table");
  }
  return it->second;
}

// --- Compile --------------------------------------------------------------------

std::optional<MoodSummary> DominantMood(const std::vector<music::MoodLabel>& labels) {
  const music::MoodLabel* best = nullptr;
  for (const auto& label : labels) {
    if (!best || label.confidence > best->confidence ||
        (label.confidence == best->confidence && label.label < best->label)) {
      best = &label;
    }
  }
  if (!best) return std::nullopt;
  return MoodSummary{best->label, best->confidence};
}

VizScript Compile(const alignment::TimedLyrics& timed, const music::AnalysisFeatures& features,
                  const MoodStyleTable& moods, std::int64_t duration_ms,
                  std::vector<std::string>* warnings) {
  auto warn = [&](std::string message) {
    if (warnings) warnings->push_back(std::move(message));
  };

  VizScript script;
  script.duration_ms = duration_ms;

  MoodSummary summary;
  if (auto dominant = DominantMood(features.mood_labels)) {
    summary = *dominant;
    summary.dominant_mood = text::Lower(summary.dominant_mood);
  } else {
    summary = {moods.default_mood(), 0.0};
    warn("no mood labels; using default mood " + moods.default_mood());
  }
  summary.confidence = Round6(summary.confidence);
  const MoodStyle& style = moods.Lookup(summary.dominant_mood);
  script.mood_summary = summary;

  const auto& contour = features.pitch_contour;
  double min_pitch = 0;
  double max_pitch = 0;
  if (contour.empty()) {
    warn("empty pitch contour; vertical position fixed at 0.5");
  } else {
    const auto [lo, hi] = std::minmax_element(
        contour.begin(), contour.end(),
        [](const music::PitchSample& a, const music::PitchSample& b) { return a.pitch_hz < b.pitch_hz; });
    min_pitch = lo->pitch_hz;
    max_pitch = hi->pitch_hz;
  }
  if (features.loudness_envelope.empty()) warn("empty loudness envelope; size fixed at 0.5");

  for (const auto& entry : timed.entries) {
    LyricEvent event;
    event.text = entry.lyric_token;
    event.start_ms = entry.start_ms;
    event.end_ms = entry.end_ms;
    if (!contour.empty() && max_pitch > min_pitch) {
      const double mean = IntervalMean(contour, entry.start_ms, entry.end_ms,
                                       [](const music::PitchSample& s) { return s.pitch_hz; });
      event.y_norm = std::clamp((mean - min_pitch) / (max_pitch - min_pitch), 0.0, 1.0);
    } else {
      event.y_norm = 0.5;
    }
    if (!features.loudness_envelope.empty()) {
      event.size_norm = std::clamp(
          IntervalMean(features.loudness_envelope, entry.start_ms, entry.end_ms,
                       [](const music::LoudnessSample& s) { return s.level; }),
          0.0, 1.0);
    } else {
      event.size_norm = 0.5;
    }
    event.y_norm = Round6(event.y_norm);
    event.size_norm = Round6(event.size_norm);
    event.mood_class = summary.dominant_mood;
    event.color_hex = style.color_hex;
    event.font_style_class = style.font_style_class;
    script.lyric_events.push_back(std::move(event));
  }
  std::stable_sort(script.lyric_events.begin(), script.lyric_events.end(),
                   [](const LyricEvent& a, const LyricEvent& b) { return a.start_ms < b.start_ms; });

  for (const auto& beat : features.beats) {
    script.beat_events.push_back({beat.time_ms, Round6(std::clamp(beat.strength, 0.0, 1.0))});
  }
  return script;
}

// --- Wire format ----------------------------------------------------------------

std::string SerializeScript(const VizScript& script) {
  std::string out = "{\n";
  out += "  \"version\": " + Quote(script.version) + ",\n";
  out += "  \"durationMs\": " + std::to_string(script.duration_ms);
  if (script.mood_summary) {
    out += ",\n  \"moodSummary\": {\"dominantMood\": " + Quote(script.mood_summary->dominant_mood) +
           ", \"confidence\": " + Fixed6(script.mood_summary->confidence) + "}";
  }
  if (!script.lyric_events.empty()) {
    out += ",\n  \"lyricEvents\": [\n";
    for (std::size_t i = 0; i < script.lyric_events.size(); ++i) {
      const auto& e = script.lyric_events[i];
      out += "    {\"text\": " + Quote(e.text) + ", \"startMs\": " + std::to_string(e.start_ms) +
             ", \"endMs\": " + std::to_string(e.end_ms) + ", \"yNorm\": " + Fixed6(e.y_norm) +
             ", \"sizeNorm\": " + Fixed6(e.size_norm) + ", \"moodClass\": " + Quote(e.mood_class) +
             ", \"colorHex\": " + Quote(e.color_hex) + ", \"fontStyleClass\": " + Quote(e.font_style_class) +
             "}";
      out += i + 1 < script.lyric_events.size() ? ",\n" : "\n";
    }
    out += "  ]";
  }
  if (!script.beat_events.empty()) {
    out += ",\n  \"beatEvents\": [\n";
    for (std::size_t i = 0; i < script.beat_events.size(); ++i) {
      const auto& b = script.beat_events[i];
      out += "    {\"timeMs\": " + std::to_string(b.time_ms) + ", \"intensityNorm\": " + Fixed6(b.intensity_norm) + "}";
      out += i + 1 < script.beat_events.size() ? ",\n" : "\n";
    }
    out += "  ]";
  }
  out += "\n}\n";
  return out;
}

VizScript ParseScript(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("viz script: ") + e.what());
  }
  VizScript script;
  try {
    script.version = doc.at("version").get<std::string>();
    if (script.version != kVizScriptVersion) {
      throw Error(ErrorCode::kContractViolation, "unsupported viz script version " + script.version);
    }
    script.duration_ms = doc.at("durationMs").get<std::int64_t>();
    if (doc.contains("moodSummary")) {
      const auto& m = doc["moodSummary"];
      script.mood_summary = MoodSummary{m.at("dominantMood").get<std::string>(), m.at("confidence").get<double>()};
    }
    if (doc.contains("lyricEvents")) {
      for (const auto& e : doc["lyricEvents"]) {
        script.lyric_events.push_back({e.at("text").get<std::string>(), e.at("startMs").get<std::int64_t>(),
                                       e.at("endMs").get<std::int64_t>(), e.at("yNorm").get<double>(),
                                       e.at("sizeNorm").get<double>(), e.at("moodClass").get<std::string>(),
                                       e.at("colorHex").get<std::string>(),
                                       e.at("fontStyleClass").get<std::string>()});
      }
    }
    if (doc.contains("beatEvents")) {
      for (const auto& b : doc["beatEvents"]) {
        script.beat_events.push_back({b.at("timeMs").get<std::int64_t>(), b.at("intensityNorm").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("viz script: ") + e.what());
  }
  return script;
}

}  // namespace songcraft::viz
