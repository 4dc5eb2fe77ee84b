#include "songcraft/lyric_alignment.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "songcraft/errors.hpp"
#include "text_util.hpp"

namespace songcraft::alignment {

namespace {

// Multi-byte punctuation commonly found in lyric text.
constexpr std::string_view kUnicodePunct[] = {
    "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99",  // curly quotes
    "\xE2\x80\xA6", "\xE2\x80\x94", "\xE2\x80\x93",                  // ellipsis, dashes
    "\xC2\xA1", "\xC2\xBF"};

std::size_t PunctPrefix(std::string_view s) {
  if (s.empty()) return 0;
  if (static_cast<unsigned char>(s[0]) < 0x80) {
    return std::ispunct(static_cast<unsigned char>(s[0])) ? 1 : 0;
  }
  for (auto p : kUnicodePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

std::size_t PunctSuffix(std::string_view s) {
  if (s.empty()) return 0;
  if (static_cast<unsigned char>(s.back()) < 0x80) {
    return std::ispunct(static_cast<unsigned char>(s.back())) ? 1 : 0;
  }
  for (auto p : kUnicodePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t Levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

void FinishDropped(TokenSequence& seq) {
  if (seq.tokens.empty()) {
    seq.dropped.clear();
    return;
  }
  for (auto& d : seq.dropped) {
    if (d.attach_to >= seq.tokens.size()) d.attach_to = seq.tokens.size() - 1;
  }
}

void AddWord(TokenSequence& seq, std::string surface, std::size_t source_index) {
  std::string normalized = NormalizeToken(surface);
  if (normalized.empty()) {
    if (seq.tokens.empty()) {
      seq.dropped.push_back({std::move(surface), 0, true});
    } else {
      seq.dropped.push_back({std::move(surface), seq.tokens.size() - 1, false});
    }
    return;
  }
  seq.tokens.push_back({std::move(surface), std::move(normalized), source_index});
}

}  // namespace

std::string NormalizeToken(std::string_view surface) {
  std::string_view s = surface;
  for (;;) {
    while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
    while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
    const std::size_t pre = PunctPrefix(s);
    if (pre) {
      s.remove_prefix(pre);
      continue;
    }
    const std::size_t suf = PunctSuffix(s);
    if (suf) {
      s.remove_suffix(suf);
      continue;
    }
    break;
  }
  std::string out;
  out.reserve(s.size());
  bool space = false;
  for (char c : s) {
    if (IsSpace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return text::Lower(out);
}

TokenSequence Tokenize(std::string_view text) {
  TokenSequence seq;
  std::size_t word_index = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) AddWord(seq, std::string(text.substr(start, i - start)), word_index++);
  }
  FinishDropped(seq);
  return seq;
}

TokenSequence TokensFromTranscript(const std::vector<music::TranscriptToken>& transcript) {
  TokenSequence seq;
  for (std::size_t i = 0; i < transcript.size(); ++i) AddWord(seq, transcript[i].token, i);
  FinishDropped(seq);
  return seq;
}

double Similarity(std::string_view a, std::string_view b) {
  const auto ua = text::DecodeUtf8(a);
  const auto ub = text::DecodeUtf8(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(Levenshtein(ua, ub)) / static_cast<double>(longest);
}

int TokenScore(std::string_view a, std::string_view b, const ScoringScheme& scheme) {
  if (a == b) return scheme.match;
  if (Similarity(a, b) >= scheme.near_threshold) return scheme.near_match;
  return scheme.mismatch;
}

ScoreGrid BuildScoreGrid(const TokenSequence& predicted, const TokenSequence& lyrics,
                         const ScoringScheme& scheme) {
  ScoreGrid grid(predicted.size(), lyrics.size());
  // Repeated words (choruses) are common; score each distinct pair once.
  std::unordered_map<std::string, int> cache;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < lyrics.size(); ++j) {
      const auto& a = predicted.tokens[i].normalized;
      const auto& b = lyrics.tokens[j].normalized;
      std::string key;
      key.reserve(a.size() + b.size() + 1);
      key.append(a).push_back('\0');
      key.append(b);
      auto [it, inserted] = cache.try_emplace(std::move(key), 0);
      if (inserted) it->second = TokenScore(a, b, scheme);
      grid(i, j) = it->second;
    }
  }
  return grid;
}

AlignmentMatrix FillMatrix(const ScoreGrid& s, int gap) {
  AlignmentMatrix m;
  m.rows = s.rows() + 1;
  m.cols = s.cols() + 1;
  m.scores.assign(m.rows * m.cols, 0);
  m.moves.assign(m.rows * m.cols, Move::kNone);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t { return i * m.cols + j; };
  for (std::size_t i = 1; i < m.rows; ++i) {
    m.scores[at(i, 0)] = static_cast<int>(i) * gap;
    m.moves[at(i, 0)] = Move::kUp;
  }
  for (std::size_t j = 1; j < m.cols; ++j) {
    m.scores[at(0, j)] = static_cast<int>(j) * gap;
    m.moves[at(0, j)] = Move::kLeft;
  }
  for (std::size_t i = 1; i < m.rows; ++i) {
    for (std::size_t j = 1; j < m.cols; ++j) {
      const int diag = m.scores[at(i - 1, j - 1)] + s(i - 1, j - 1);
      const int up = m.scores[at(i - 1, j)] + gap;
      const int left = m.scores[at(i, j - 1)] + gap;
      int best = diag;
      Move move = Move::kDiag;
      if (up > best) {
        best = up;
        move = Move::kUp;
      }
      if (left > best) {
        best = left;
        move = Move::kLeft;
      }
      m.scores[at(i, j)] = best;
      m.moves[at(i, j)] = move;
    }
  }
  return m;
}

AlignmentPath GlobalAlign(const ScoreGrid& substitution, int gap) {
  const AlignmentMatrix m = FillMatrix(substitution, gap);
  AlignmentPath path;
  path.score = m.F(m.rows - 1, m.cols - 1);
  std::size_t i = m.rows - 1;
  std::size_t j = m.cols - 1;
  path.steps.reserve(i + j);
  while (i > 0 || j > 0) {
    switch (m.move(i, j)) {
      case Move::kDiag:
        path.steps.push_back({AlignStep::Kind::kMatch, static_cast<int>(i - 1), static_cast<int>(j - 1)});
        --i;
        --j;
        break;
      case Move::kUp:
        path.steps.push_back({AlignStep::Kind::kGapInLyrics, static_cast<int>(i - 1), -1});
        --i;
        break;
      case Move::kLeft:
        path.steps.push_back({AlignStep::Kind::kGapInPredicted, -1, static_cast<int>(j - 1)});
        --j;
        break;
      case Move::kNone:
        throw Error(ErrorCode::kContractViolation, "alignment traceback reached an empty cell");
    }
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

AlignmentPath Align(const TokenSequence& predicted, const TokenSequence& lyrics,
                    const ScoringScheme& scheme) {
  return GlobalAlign(BuildScoreGrid(predicted, lyrics, scheme), scheme.gap);
}

TimedLyrics TransferTimings(const AlignmentPath& path, const TokenSequence& predicted,
                            const std::vector<music::TranscriptToken>& transcript,
                            const TokenSequence& lyrics, std::int64_t song_duration_ms) {
  const std::size_t n = lyrics.size();
  TimedLyrics out;
  if (n == 0) return out;
  if (!transcript.empty() && song_duration_ms < transcript.back().end_ms) {
    throw Error(ErrorCode::kContractViolation, "song duration ends before the transcript");
  }
  if (song_duration_ms < static_cast<std::int64_t>(n)) {
    throw Error(ErrorCode::kDegenerateTiming,
                "song of " + std::to_string(song_duration_ms) + " ms cannot hold " +
                    std::to_string(n) + " lyric tokens");
  }

  std::vector<const music::TranscriptToken*> partner(n, nullptr);
  for (const auto& step : path.steps) {
    if (step.kind != AlignStep::Kind::kMatch) continue;
    const auto& token = predicted.tokens.at(static_cast<std::size_t>(step.predicted));
    partner.at(static_cast<std::size_t>(step.lyric)) = &transcript.at(token.source_index);
  }

  out.entries.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.entries[j].lyric_token = lyrics.tokens[j].surface;
    if (partner[j]) {
      out.entries[j].start_ms = partner[j]->start_ms;
      out.entries[j].end_ms = partner[j]->end_ms;
      out.entries[j].source = TimingSource::kMatched;
    }
  }

  for (std::size_t a = 0; a < n;) {
    if (partner[a]) {
      ++a;
      continue;
    }
    std::size_t b = a;
    while (b < n && !partner[b]) ++b;
    const std::int64_t lo = a == 0 ? 0 : out.entries[a - 1].end_ms;
    const std::int64_t hi = std::max(lo, b == n ? song_duration_ms : out.entries[b].start_ms);
    const auto count = static_cast<std::int64_t>(b - a);
    const std::int64_t width = (hi - lo) / count;
    for (std::size_t k = a; k < b; ++k) {
      const auto slot = static_cast<std::int64_t>(k - a);
      auto& e = out.entries[k];
      e.start_ms = lo + slot * width;
      e.end_ms = k + 1 == b ? hi : lo + (slot + 1) * width;
      e.source = TimingSource::kInterpolated;
    }
    a = b;
  }

  // Only degenerate gaps (runs wider than the time between their neighbours)
  // need adjusting: starts are pushed forward past their predecessor and each
  // end is clipped to its successor's start, keeping at least 1 ms per entry.
  auto& e = out.entries;
  std::int64_t prev_end = 0;
  for (auto& entry : e) {
    entry.start_ms = std::max(entry.start_ms, prev_end);
    entry.end_ms = std::max(entry.end_ms, entry.start_ms + 1);
    prev_end = entry.end_ms;
  }
  e.back().end_ms = std::min(e.back().end_ms, song_duration_ms);
  e.back().start_ms = std::min(e.back().start_ms, e.back().end_ms - 1);
  for (std::size_t k = n - 1; k-- > 0;) {
    e[k].end_ms = std::min(e[k].end_ms, e[k + 1].start_ms);
    e[k].start_ms = std::min(e[k].start_ms, e[k].end_ms - 1);
  }

  for (const auto& d : lyrics.dropped) {
    if (!d.before) e.at(d.attach_to).lyric_token += " " + d.surface;
  }
  for (auto it = lyrics.dropped.rbegin(); it != lyrics.dropped.rend(); ++it) {
    if (it->before) e.at(it->attach_to).lyric_token = it->surface + " " + e.at(it->attach_to).lyric_token;
  }
  return out;
}

}  // namespace songcraft::alignment
