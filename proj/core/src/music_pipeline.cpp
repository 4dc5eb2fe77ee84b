#include "songcraft/music_pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <span>
#include <sstream>

#include "songcraft/errors.hpp"
#include "text_util.hpp"

namespace songcraft::music {

namespace {

using text::Lower;
using text::Trim;

std::string CleanKeyword(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == ',' || c == '.' || c == '!' || c == '?' || c == ';' ||
        std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  if (text::CodePointCount(out) > kMaxStylePromptChars) {
    out = Trim(text::PrefixCodePoints(out, kMaxStylePromptChars));
  }
  return out;
}

std::string Join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

bool ContainsAny(std::string_view haystack, std::span<const std::string_view> needles) {
  for (auto n : needles) {
    if (text::ContainsWord(haystack, n)) return true;
  }
  return false;
}

bool ContainsSubstring(std::string_view haystack, std::span<const std::string_view> needles) {
  for (auto n : needles) {
    if (haystack.find(n) != std::string_view::npos) return true;
  }
  return false;
}

constexpr std::string_view kInstruments[] = {
    "piano", "guitar", "acoustic guitar", "electric guitar", "bass", "drums", "drum",
    "violin", "viola", "cello", "strings", "string", "synth", "synthesizer", "flute",
    "saxophone", "sax", "trumpet", "horn", "horns", "ukulele", "harp", "organ",
    "clarinet", "percussion", "keyboard", "keys", "bell", "bells", "orchestra",
    "choir", "marimba", "xylophone", "accordion", "harmonica", "banjo", "mandolin"};

constexpr std::string_view kGenres[] = {
    "pop", "rock", "jazz", "blues", "ballad", "folk", "classical", "hip hop", "hip-hop",
    "rap", "r&b", "rnb", "soul", "funk", "edm", "electronic", "house", "techno", "lo-fi",
    "lofi", "country", "indie", "k-pop", "kpop", "metal", "punk", "reggae", "gospel",
    "acoustic", "ambient", "disco", "bossa nova", "trot", "musical", "orchestral", "city pop"};

constexpr std::string_view kTempoWords[] = {
    "slow", "fast", "upbeat", "moderate", "mid-tempo", "uptempo", "downtempo", "lively",
    "relaxed", "quick", "steady"};

constexpr std::string_view kDynamicsWords[] = {
    "loud", "soft", "quiet", "powerful", "gentle", "crescendo", "building", "dynamic",
    "dynamics", "intense", "delicate"};

void AppendTo(std::optional<std::string>& slot, const std::string& value) {
  if (!slot) {
    slot = value;
  } else {
    *slot += " " + value;
  }
}

SectionKind SectionKindForLabel(std::string_view label) {
  const std::string lower = Lower(label);
  if (lower.rfind("verse", 0) == 0 || lower.rfind("pre-chorus", 0) == 0 ||
      lower.rfind("prechorus", 0) == 0) {
    return SectionKind::kVerse;
  }
  if (lower.rfind("chorus", 0) == 0 || lower.rfind("hook", 0) == 0 ||
      lower.rfind("refrain", 0) == 0) {
    return SectionKind::kChorus;
  }
  return SectionKind::kBridge;
}

std::string PadOrdinal(int ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", ordinal);
  return buf;
}

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kFeatureInvalid, message);
}

double ClampUnit(double value, const std::string& what, std::vector<std::string>* warnings) {
  if (value >= 0.0 && value <= 1.0) return value;
  const double clamped = std::clamp(value, 0.0, 1.0);
  if (warnings) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s %g clamped to %g", what.c_str(), value, clamped);
    warnings->emplace_back(buf);
  }
  return clamped;
}

template <typename T>
void RequireStrictlyIncreasing(const std::vector<T>& series, const char* name) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].time_ms < 0) Invalid(std::string(name) + " has a negative time");
    if (i && series[i].time_ms <= series[i - 1].time_ms) {
      Invalid(std::string(name) + " is not strictly increasing at index " + std::to_string(i));
    }
  }
}

}  // namespace

StylePrompt BuildStylePrompt(const MusicComponents& components) {
  auto present = [](const std::optional<std::string>& v) {
    return v && !CleanKeyword(*v).empty();
  };
  if (!present(components.genre) && !present(components.mood)) {
    throw IncompleteComponents({"genre", "mood"});
  }

  std::vector<std::string> candidates;
  for (const auto* field : {&components.genre, &components.mood, &components.tempo,
                            &components.dynamics, &components.rhythm, &components.vocal_tone}) {
    if (*field) candidates.push_back(**field);
  }
  candidates.insert(candidates.end(), components.instrumentation.begin(),
                    components.instrumentation.end());

  StylePrompt prompt;
  std::set<std::string> seen;
  for (const auto& raw : candidates) {
    std::string keyword = CleanKeyword(raw);
    if (keyword.empty()) continue;
    if (!seen.insert(Lower(keyword)).second) continue;
    prompt.keywords.push_back(std::move(keyword));
  }
  prompt.rendered_text = Join(prompt.keywords, ", ");
  while (text::CodePointCount(prompt.rendered_text) > kMaxStylePromptChars) {
    prompt.keywords.pop_back();
    prompt.rendered_text = Join(prompt.keywords, ", ");
  }
  return prompt;
}

std::optional<std::string> ValidateStylePrompt(const StylePrompt& prompt) {
  if (prompt.keywords.empty()) return "no keywords";
  if (prompt.rendered_text != Join(prompt.keywords, ", ")) return "rendering is not the keyword join";
  if (text::CodePointCount(prompt.rendered_text) > kMaxStylePromptChars) return "longer than 150 characters";
  std::set<std::string> seen;
  for (const auto& keyword : prompt.keywords) {
    if (keyword.empty() || Trim(keyword) != keyword) return "empty or padded keyword";
    if (keyword.find_first_of(",.!?") != std::string::npos) return "keyword contains punctuation";
    if (!seen.insert(Lower(keyword)).second) return "duplicate keyword " + keyword;
  }
  return std::nullopt;
}

MusicComponents ParseMusicComponents(std::string_view input) {
  MusicComponents out;
  std::string normalized(input);
  for (std::string_view sep : {" and ", " with ", ";", "/", "\n"}) {
    std::size_t pos = 0;
    while ((pos = normalized.find(sep, pos)) != std::string::npos) {
      normalized.replace(pos, sep.size(), ",");
    }
  }
  std::stringstream ss(normalized);
  std::string clause;
  while (std::getline(ss, clause, ',')) {
    clause = Trim(clause);
    while (!clause.empty() && (clause.back() == '.' || clause.back() == '!')) clause.pop_back();
    if (clause.empty()) continue;
    const std::string lower = Lower(clause);
    static constexpr std::string_view kTempoMarkers[] = {"tempo", "bpm"};
    static constexpr std::string_view kVocalMarkers[] = {"vocal", "voice", "singer", "singing", "sung"};
    static constexpr std::string_view kRhythmMarkers[] = {"rhythm", "groove", "swing", "syncopat"};
    static constexpr std::string_view kBeatWords[] = {"beat", "beats"};
    if (ContainsSubstring(lower, kTempoMarkers)) {
      AppendTo(out.tempo, clause);
    } else if (ContainsSubstring(lower, kVocalMarkers)) {
      AppendTo(out.vocal_tone, clause);
    } else if (ContainsSubstring(lower, kRhythmMarkers) ||
               ContainsAny(lower, kBeatWords)) {
      AppendTo(out.rhythm, clause);
    } else if (ContainsAny(lower, kInstruments)) {
      out.instrumentation.push_back(clause);
    } else if (ContainsAny(lower, kGenres)) {
      AppendTo(out.genre, clause);
    } else if (ContainsAny(lower, kTempoWords)) {
      AppendTo(out.tempo, clause);
    } else if (ContainsAny(lower, kDynamicsWords)) {
      AppendTo(out.dynamics, clause);
    } else {
      AppendTo(out.mood, clause);
    }
  }
  return out;
}

// --- Lyrics ---------------------------------------------------------------------

std::string_view ToString(SectionKind kind) {
  switch (kind) {
    case SectionKind::kVerse: return "Verse";
    case SectionKind::kChorus: return "Chorus";
    case SectionKind::kBridge: return "Bridge";
  }
  return "Verse";
}

std::string LyricsDocument::LyricLines() const {
  std::string out;
  for (const auto& section : sections) {
    for (const auto& line : section.lines) {
      if (!out.empty()) out.push_back('\n');
      out += line;
    }
  }
  return out;
}

LyricsDocument LyricsFromSections(std::vector<LyricsSection> sections) {
  LyricsDocument doc;
  doc.sections = std::move(sections);
  for (const auto& section : doc.sections) {
    if (!doc.full_text.empty()) doc.full_text += "\n\n";
    doc.full_text += "[" + std::string(ToString(section.kind)) + "]";
    for (const auto& line : section.lines) doc.full_text += "\n" + line;
  }
  return doc;
}

LyricsDocument ParseLyricsDocument(std::string_view input) {
  std::vector<LyricsSection> sections;
  std::stringstream ss{std::string(input)};
  std::string line;
  while (std::getline(ss, line)) {
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      sections.push_back({SectionKindForLabel(Trim(line.substr(1, line.size() - 2))), {}});
      continue;
    }
    if (sections.empty()) sections.push_back({SectionKind::kVerse, {}});
    sections.back().lines.push_back(line);
  }
  std::erase_if(sections, [](const LyricsSection& s) { return s.lines.empty(); });
  const auto has = [&](SectionKind kind) {
    return std::any_of(sections.begin(), sections.end(),
                       [&](const LyricsSection& s) { return s.kind == kind; });
  };
  if (!has(SectionKind::kVerse) || !has(SectionKind::kChorus)) {
    throw Error(ErrorCode::kLyricsFormat, "generated lyrics need at least one [Verse] and one [Chorus]");
  }
  return LyricsFromSections(std::move(sections));
}

// --- Features -------------------------------------------------------------------

AnalysisFeatures IngestFeatures(std::string_view document, std::vector<std::string>* warnings) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    Invalid(std::string("feature document does not parse: ") + e.what());
  }
  AnalysisFeatures out;
  try {
    if (doc.value("format", "") != kFeatureFormat) Invalid("format is not songcraft-features");
    if (doc.value("version", 0) != kFeatureVersion) Invalid("unsupported feature document version");

    for (const auto& t : doc.at("predictedTranscript")) {
      out.predicted_transcript.push_back(
          {t.at("token").get<std::string>(), t.at("startMs").get<std::int64_t>(),
           t.at("endMs").get<std::int64_t>()});
    }
    for (const auto& p : doc.at("pitchContour")) {
      out.pitch_contour.push_back({p.at("timeMs").get<std::int64_t>(), p.at("pitchHz").get<double>()});
    }
    for (const auto& l : doc.at("loudnessEnvelope")) {
      out.loudness_envelope.push_back({l.at("timeMs").get<std::int64_t>(), l.at("level").get<double>()});
    }
    for (const auto& b : doc.at("beats")) {
      out.beats.push_back({b.at("timeMs").get<std::int64_t>(), b.at("strength").get<double>()});
    }
    for (const auto& m : doc.at("moodLabels")) {
      out.mood_labels.push_back({m.at("label").get<std::string>(), m.at("confidence").get<double>()});
    }
    if (doc.contains("instruments")) {
      out.instruments = doc.at("instruments").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    Invalid(std::string("malformed feature document: ") + e.what());
  }

  const auto& tx = out.predicted_transcript;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    if (tx[i].start_ms < 0 || tx[i].end_ms <= tx[i].start_ms) {
      Invalid("transcript token " + std::to_string(i) + " has an empty or negative interval");
    }
    if (i && tx[i].start_ms < tx[i - 1].start_ms) {
      Invalid("transcript is not ordered at token " + std::to_string(i));
    }
    if (i && tx[i].start_ms < tx[i - 1].end_ms) {
      Invalid("transcript intervals overlap at token " + std::to_string(i));
    }
  }
  out.instrumental = tx.empty();
  if (out.instrumental && warnings) warnings->emplace_back("empty transcript; treating song as instrumental");

  RequireStrictlyIncreasing(out.pitch_contour, "pitchContour");
  RequireStrictlyIncreasing(out.loudness_envelope, "loudnessEnvelope");
  RequireStrictlyIncreasing(out.beats, "beats");
  for (const auto& p : out.pitch_contour) {
    if (!(p.pitch_hz > 0)) Invalid("pitch must be positive");
  }
  for (auto& l : out.loudness_envelope) l.level = ClampUnit(l.level, "loudness level", warnings);
  for (auto& b : out.beats) b.strength = ClampUnit(b.strength, "beat strength", warnings);
  for (auto& m : out.mood_labels) m.confidence = ClampUnit(m.confidence, "mood confidence", warnings);
  return out;
}

std::string SerializeFeatures(const AnalysisFeatures& features) {
  nlohmann::ordered_json doc;
  doc["format"] = kFeatureFormat;
  doc["version"] = kFeatureVersion;
  auto& tx = doc["predictedTranscript"] = nlohmann::ordered_json::array();
  for (const auto& t : features.predicted_transcript) {
    tx.push_back({{"token", t.token}, {"startMs", t.start_ms}, {"endMs", t.end_ms}});
  }
  auto& pitch = doc["pitchContour"] = nlohmann::ordered_json::array();
  for (const auto& p : features.pitch_contour) pitch.push_back({{"timeMs", p.time_ms}, {"pitchHz", p.pitch_hz}});
  auto& loud = doc["loudnessEnvelope"] = nlohmann::ordered_json::array();
  for (const auto& l : features.loudness_envelope) loud.push_back({{"timeMs", l.time_ms}, {"level", l.level}});
  auto& beats = doc["beats"] = nlohmann::ordered_json::array();
  for (const auto& b : features.beats) beats.push_back({{"timeMs", b.time_ms}, {"strength", b.strength}});
  auto& moods = doc["moodLabels"] = nlohmann::ordered_json::array();
  for (const auto& m : features.mood_labels) moods.push_back({{"label", m.label}, {"confidence", m.confidence}});
  doc["instruments"] = features.instruments;
  return doc.dump(2) + "\n";
}

// --- Backends -------------------------------------------------------------------

FixtureMusicBackend::FixtureMusicBackend(std::filesystem::path fixture_dir)
    : dir_(std::move(fixture_dir)) {
  const auto catalog_path = dir_ / "catalog.json";
  std::ifstream in(catalog_path);
  if (!in) throw Error(ErrorCode::kConfiguration, "missing fixture catalog " + catalog_path.string());
  try {
    const auto catalog = nlohmann::json::parse(in);
    for (const auto& song : catalog.at("songs")) {
      entries_.push_back({song.at("audioRef").get<std::string>(),
                          song.at("durationMs").get<std::int64_t>(),
                          dir_ / song.at("features").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfiguration, catalog_path.string() + ": " + e.what());
  }
  if (entries_.empty()) throw Error(ErrorCode::kConfiguration, "fixture catalog has no songs");
}

const FixtureMusicBackend::Entry& FixtureMusicBackend::EntryFor(int ordinal) const {
  if (ordinal < 1) throw Error(ErrorCode::kContractViolation, "song ordinals start at 1");
  return entries_[static_cast<std::size_t>(ordinal - 1) % entries_.size()];
}

SongArtifact FixtureMusicBackend::Generate(const SongRequest& request) {
  const Entry& entry = EntryFor(request.ordinal);
  return {"fx-" + PadOrdinal(request.ordinal), entry.audio_ref, entry.duration_ms, request.style_text};
}

std::string FixtureMusicBackend::Analyze(const SongArtifact& song) {
  int ordinal = 0;
  if (song.song_id.rfind("fx-", 0) != 0 || std::sscanf(song.song_id.c_str() + 3, "%d", &ordinal) != 1) {
    throw Error(ErrorCode::kNotFound, "song " + song.song_id + " is not a fixture song");
  }
  const Entry& entry = EntryFor(ordinal);
  std::ifstream in(entry.features, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfiguration, "missing feature fixture " + entry.features.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SongArtifact RequestSong(MusicBackend& backend, const LyricsDocument& lyrics,
                         const StylePrompt& style, int ordinal) {
  if (Trim(lyrics.LyricLines()).empty()) {
    throw Error(ErrorCode::kContractViolation, "cannot request a song for empty lyrics");
  }
  if (auto problem = ValidateStylePrompt(style)) {
    throw Error(ErrorCode::kContractViolation, "invalid style prompt: " + *problem);
  }
  SongArtifact song = backend.Generate({lyrics.full_text, style.rendered_text, ordinal});
  if (song.song_id.empty() || song.audio_ref.empty() || song.duration_ms <= 0) {
    throw Error(ErrorCode::kInvalidArtifact, "generator returned no audio or a zero duration");
  }
  return song;
}

}  // namespace songcraft::music
