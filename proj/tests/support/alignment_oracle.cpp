#include "alignment_oracle.hpp"

#include <algorithm>
#include <climits>
#include <random>
#include <unordered_set>

namespace songcraft::testing {

double OracleSimilarity(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return 1.0 - static_cast<double>(d[a.size()][b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

int OracleTokenScore(const std::string& a, const std::string& b) {
  if (a == b) return 2;
  return OracleSimilarity(a, b) >= 0.8 ? 1 : -1;
}

namespace {

struct Enumerator {
  const ScoreTable& sub;
  int gap;
  std::size_t m;
  std::size_t n;
  int best = INT_MIN;

  void Visit(std::size_t i0, std::size_t j0, int acc, int matched) {
    const int unmatched = static_cast<int>(m + n) - 2 * matched;
    best = std::max(best, acc + gap * unmatched);
    for (std::size_t i = i0; i < m; ++i) {
      for (std::size_t j = j0; j < n; ++j) Visit(i + 1, j + 1, acc + sub[i][j], matched + 1);
    }
  }
};

}  // namespace

int BruteForceScore(const ScoreTable& sub, int gap, std::optional<std::size_t> columns) {
  const std::size_t m = sub.size();
  const std::size_t n = columns ? *columns : m ? sub[0].size() : 0;
  Enumerator e{sub, gap, m, n};
  e.Visit(0, 0, 0, 0);
  return e.best;
}

int MemoizedEnumerationScore(const ScoreTable& sub, int gap, std::optional<std::size_t> columns) {
  const std::size_t m = sub.size();
  const std::size_t n = columns ? *columns : m ? sub[0].size() : 0;
  // best[i][j]: best contribution of pairs chosen from rows >= i and columns
  // >= j, counting each chosen pair as sub - 2 * gap (the two gaps it saves).
  std::vector<std::vector<int>> best(m + 1, std::vector<int>(n + 1, 0));
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t j = n; j-- > 0;) {
      int value = 0;
      for (std::size_t a = i; a < m; ++a) {
        for (std::size_t b = j; b < n; ++b) value = std::max(value, sub[a][b] - 2 * gap + best[a + 1][b + 1]);
      }
      best[i][j] = value;
    }
  }
  return gap * static_cast<int>(m + n) + best[0][0];
}

std::string CheckPath(const alignment::AlignmentPath& path, std::size_t m, std::size_t n) {
  using Kind = alignment::AlignStep::Kind;
  std::size_t next_p = 0;
  std::size_t next_l = 0;
  for (const auto& s : path.steps) {
    const bool uses_p = s.kind == Kind::kMatch || s.kind == Kind::kGapInLyrics;
    const bool uses_l = s.kind == Kind::kMatch || s.kind == Kind::kGapInPredicted;
    if (uses_p) {
      if (s.predicted != static_cast<int>(next_p)) return "predicted index out of order";
      ++next_p;
    } else if (s.predicted != -1) {
      return "gap step carries a predicted index";
    }
    if (uses_l) {
      if (s.lyric != static_cast<int>(next_l)) return "lyric index out of order";
      ++next_l;
    } else if (s.lyric != -1) {
      return "gap step carries a lyric index";
    }
  }
  if (next_p != m || next_l != n) return "path does not cover both sequences";
  return {};
}

int PathScore(const alignment::AlignmentPath& path, const ScoreTable& sub, int gap) {
  int score = 0;
  for (const auto& s : path.steps) {
    score += s.kind == alignment::AlignStep::Kind::kMatch
                 ? sub[static_cast<std::size_t>(s.predicted)][static_cast<std::size_t>(s.lyric)]
                 : gap;
  }
  return score;
}

}  // namespace songcraft::testing

namespace songcraft::testing {

namespace {

std::vector<std::vector<int>> AllSequences(int symbols, int max_len) {
  std::vector<std::vector<int>> out{{}};
  for (std::size_t start = 0; start < out.size(); ++start) {
    if (static_cast<int>(out[start].size()) == max_len) continue;
    for (int t = 0; t < symbols; ++t) {
      auto next = out[start];
      next.push_back(t);
      out.push_back(std::move(next));
    }
  }
  return out;
}

alignment::TokenSequence SequenceOf(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) text += w + " ";
  return alignment::Tokenize(text);
}

std::string Describe(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::string out = "[";
  for (const auto& w : a) out += w + " ";
  out += "] vs [";
  for (const auto& w : b) out += w + " ";
  return out + "]";
}

std::string CheckOne(const ScoreTable& sub, std::size_t n, const alignment::AlignmentPath& path, int expected,
                     int gap) {
  const std::size_t m = sub.size();
  if (path.score != expected) {
    return "score " + std::to_string(path.score) + " != oracle " + std::to_string(expected);
  }
  if (auto problem = CheckPath(path, m, n); !problem.empty()) return problem;
  if (PathScore(path, sub, gap) != path.score) return "path does not add up to its score";
  return {};
}

}  // namespace

OracleReport ExhaustiveAlignmentCheck(const std::vector<std::string>& alphabet, int max_len) {
  OracleReport report;
  const int k = static_cast<int>(alphabet.size());
  const alignment::ScoringScheme scheme;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int score = alignment::TokenScore(alphabet[a], alphabet[b], scheme);
      if (score != (a == b ? scheme.match : scheme.mismatch)) {
        report.failure = "alphabet is not match/mismatch only: " + alphabet[a] + "/" + alphabet[b];
        return report;
      }
    }
  }
  const auto seqs = AllSequences(k, max_len);
  // positions[s][t]: bit j set when seqs[s][j] == t.
  std::vector<std::vector<std::uint8_t>> positions(seqs.size(), std::vector<std::uint8_t>(k, 0));
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (std::size_t j = 0; j < seqs[s].size(); ++j) positions[s][seqs[s][j]] |= static_cast<std::uint8_t>(1u << j);
  }
  const int bits = max_len;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1u << 21);
  for (std::size_t p = 0; p < seqs.size(); ++p) {
    const auto& pred = seqs[p];
    for (std::size_t l = 0; l < seqs.size(); ++l) {
      ++report.pairs;
      const auto& lyr = seqs[l];
      std::uint64_t key = pred.size() | (lyr.size() << 4);
      for (std::size_t i = 0; i < pred.size(); ++i) {
        key |= static_cast<std::uint64_t>(positions[l][pred[i]]) << (8 + bits * i);
      }
      if (!seen.insert(key).second) continue;

      ScoreTable sub(pred.size(), std::vector<int>(lyr.size()));
      alignment::ScoreGrid grid(pred.size(), lyr.size());
      for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < lyr.size(); ++j) {
          sub[i][j] = alignment::TokenScore(alphabet[pred[i]], alphabet[lyr[j]], scheme);
          grid(i, j) = sub[i][j];
        }
      }
      const auto path = alignment::GlobalAlign(grid, scheme.gap);
      const int oracle = BruteForceScore(sub, scheme.gap, lyr.size());
      auto problem = CheckOne(sub, lyr.size(), path, oracle, scheme.gap);
      if (problem.empty() && MemoizedEnumerationScore(sub, scheme.gap, lyr.size()) != oracle) {
        problem = "memoized enumeration disagrees with brute force";
      }
      if (!problem.empty()) {
        std::vector<std::string> a, b;
        for (int t : pred) a.push_back(alphabet[t]);
        for (int t : lyr) b.push_back(alphabet[t]);
        report.failure = Describe(a, b) + ": " + problem;
        return report;
      }
    }
  }
  report.distinct_grids = seen.size();
  return report;
}

OracleReport RandomAlignmentCheck(const std::vector<std::string>& vocabulary, int cases, int max_len,
                                  unsigned seed) {
  OracleReport report;
  std::mt19937 rng(seed);
  for (int c = 0; c < cases; ++c) {
    std::vector<std::string> a(rng() % (max_len + 1)), b(rng() % (max_len + 1));
    for (auto& w : a) w = vocabulary[rng() % vocabulary.size()];
    for (auto& w : b) w = vocabulary[rng() % vocabulary.size()];
    ScoreTable sub(a.size(), std::vector<int>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) sub[i][j] = OracleTokenScore(a[i], b[j]);
    }
    const auto path = alignment::Align(SequenceOf(a), SequenceOf(b));
    ++report.pairs;
    if (auto problem = CheckOne(sub, b.size(), path, BruteForceScore(sub, -1, b.size()), -1); !problem.empty()) {
      report.failure = Describe(a, b) + ": " + problem;
      return report;
    }
  }
  return report;
}

OracleReport SmallStringAlignmentCheck(const std::vector<std::string>& alphabet, int max_len) {
  OracleReport report;
  const auto seqs = AllSequences(static_cast<int>(alphabet.size()), max_len);
  std::vector<std::vector<std::string>> words;
  std::vector<alignment::TokenSequence> tokens;
  for (const auto& s : seqs) {
    std::vector<std::string> w;
    for (int t : s) w.push_back(alphabet[t]);
    tokens.push_back(SequenceOf(w));
    words.push_back(std::move(w));
  }
  for (std::size_t p = 0; p < seqs.size(); ++p) {
    for (std::size_t l = 0; l < seqs.size(); ++l) {
      ++report.pairs;
      ScoreTable sub(words[p].size(), std::vector<int>(words[l].size()));
      for (std::size_t i = 0; i < words[p].size(); ++i) {
        for (std::size_t j = 0; j < words[l].size(); ++j) sub[i][j] = OracleTokenScore(words[p][i], words[l][j]);
      }
      const auto path = alignment::Align(tokens[p], tokens[l]);
      if (auto problem = CheckOne(sub, words[l].size(), path, BruteForceScore(sub, -1, words[l].size()), -1);
          !problem.empty()) {
        report.failure = Describe(words[p], words[l]) + ": " + problem;
        return report;
      }
    }
  }
  return report;
}

}  // namespace songcraft::testing

namespace songcraft::testing {

std::string CheckTimingInvariants(const alignment::TimedLyrics& timed, std::int64_t duration_ms) {
  std::int64_t prev_end = 0;
  for (std::size_t k = 0; k < timed.entries.size(); ++k) {
    const auto& e = timed.entries[k];
    const std::string at = "entry " + std::to_string(k) + ": ";
    if (e.start_ms < 0 || e.end_ms > duration_ms) return at + "outside the song";
    if (e.end_ms <= e.start_ms) return at + "empty interval";
    if (e.start_ms < prev_end) return at + "overlaps its predecessor";
    prev_end = e.end_ms;
  }
  return {};
}

OracleReport RandomTimingCheck(int cases, unsigned seed) {
  OracleReport report;
  std::mt19937 rng(seed);
  const std::vector<std::string> words{"rough", "waves", "gray", "sky", "morning", "voice", "still",
                                       "breathe", "light", "home", "calm", "hold"};
  for (int c = 0; c < cases; ++c) {
    ++report.pairs;
    // Transcript: ordered, non-overlapping, random gaps.
    std::vector<music::TranscriptToken> transcript;
    std::int64_t t = static_cast<std::int64_t>(rng() % 2000);
    const int m = static_cast<int>(rng() % 15);
    for (int i = 0; i < m; ++i) {
      const std::int64_t len = 1 + static_cast<std::int64_t>(rng() % 800);
      transcript.push_back({words[rng() % words.size()], t, t + len});
      t += len + static_cast<std::int64_t>(rng() % 3 == 0 ? 0 : rng() % 1500);
    }
    // Lyrics: the transcript words with edits, drops and insertions.
    std::string lyrics_text;
    for (const auto& tok : transcript) {
      const auto r = rng() % 10;
      if (r == 0) continue;
      if (r == 1) lyrics_text += words[rng() % words.size()] + " ";
      lyrics_text += tok.token + (r == 2 ? "s" : "") + " ";
    }
    for (int extra = static_cast<int>(rng() % 4); extra > 0; --extra) lyrics_text += words[rng() % words.size()] + " ";
    const auto lyrics = alignment::Tokenize(lyrics_text);
    const auto predicted = alignment::TokensFromTranscript(transcript);
    const std::int64_t duration =
        std::max<std::int64_t>(t, static_cast<std::int64_t>(lyrics.size())) + static_cast<std::int64_t>(rng() % 3000);

    const auto path = alignment::Align(predicted, lyrics);
    alignment::TimedLyrics timed;
    try {
      timed = alignment::TransferTimings(path, predicted, transcript, lyrics, duration);
    } catch (const std::exception& e) {
      report.failure = "case " + std::to_string(c) + ": " + e.what();
      return report;
    }
    if (timed.entries.size() != lyrics.size()) {
      report.failure = "case " + std::to_string(c) + ": entry count differs from lyric count";
      return report;
    }
    if (auto problem = CheckTimingInvariants(timed, duration); !problem.empty()) {
      report.failure = "case " + std::to_string(c) + ": " + problem;
      return report;
    }

    // Oracle: matched tokens copy their partner, runs split [lo, hi) evenly.
    const std::size_t n = lyrics.size();
    std::vector<int> partner(n, -1);
    for (const auto& s : path.steps) {
      if (s.kind == alignment::AlignStep::Kind::kMatch) partner[s.lyric] = s.predicted;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> expected(n);
    bool roomy = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (partner[j] >= 0) {
        const auto& tok = transcript[predicted.tokens[partner[j]].source_index];
        expected[j] = {tok.start_ms, tok.end_ms};
      }
    }
    for (std::size_t a = 0; a < n;) {
      if (partner[a] >= 0) {
        ++a;
        continue;
      }
      std::size_t b = a;
      while (b < n && partner[b] < 0) ++b;
      const std::int64_t lo = a == 0 ? 0 : expected[a - 1].second;
      const std::int64_t hi = b == n ? duration : expected[b].first;
      const auto count = static_cast<std::int64_t>(b - a);
      if (hi - lo < count) roomy = false;
      const std::int64_t w = (hi - lo) / count;
      for (std::int64_t k = 0; k < count; ++k) {
        expected[a + k] = {lo + k * w, k + 1 == count ? hi : lo + (k + 1) * w};
      }
      a = b;
    }
    if (!roomy) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& e = timed.entries[j];
      const auto source = partner[j] >= 0 ? alignment::TimingSource::kMatched : alignment::TimingSource::kInterpolated;
      if (e.start_ms != expected[j].first || e.end_ms != expected[j].second || e.source != source) {
        report.failure = "case " + std::to_string(c) + ": entry " + std::to_string(j) + " is [" +
                         std::to_string(e.start_ms) + ", " + std::to_string(e.end_ms) + "), oracle [" +
                         std::to_string(expected[j].first) + ", " + std::to_string(expected[j].second) + ")";
        return report;
      }
    }
    ++report.distinct_grids;  // cases checked against the exact oracle
  }
  return report;
}

}  // namespace songcraft::testing
