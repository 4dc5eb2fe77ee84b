#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "songcraft/music_pipeline.hpp"

namespace songcraft::alignment {

struct Token {
  std::string surface;
  std::string normalized;
  /// Index of the originating word (transcript entry or whitespace-split word).
  std::size_t source_index = 0;
};

/// A pure-punctuation word removed before alignment. It is re-attached to
/// the kept token at `attach_to` (the preceding token, or the first one
/// when nothing precedes it).
struct DroppedToken {
  std::string surface;
  std::size_t attach_to = 0;
  bool before = false;  // attach as a prefix rather than a suffix
};

struct TokenSequence {
  std::vector<Token> tokens;
  std::vector<DroppedToken> dropped;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

/// Lowercases, strips leading/trailing punctuation and collapses internal
/// whitespace. Returns an empty string for pure punctuation.
std::string NormalizeToken(std::string_view surface);

/// Splits text on whitespace into a token sequence.
TokenSequence Tokenize(std::string_view text);
/// Builds the sequence for a predicted transcript, one token per entry.
TokenSequence TokensFromTranscript(const std::vector<music::TranscriptToken>& transcript);

/// 1 - levenshtein(a, b) / max(|a|, |b|) over code points; 1 for two empty strings.
double Similarity(std::string_view a, std::string_view b);

struct ScoringScheme {
  int match = 2;
  int near_match = 1;
  int mismatch = -1;
  int gap = -1;
  double near_threshold = 0.8;
};

/// Substitution score of two normalized tokens.
int TokenScore(std::string_view a, std::string_view b, const ScoringScheme& scheme = {});

/// Row-major substitution scores: rows index predicted tokens, columns lyric tokens.
class ScoreGrid {
 public:
  ScoreGrid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int operator()(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
  int& operator()(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> cells_;
};

ScoreGrid BuildScoreGrid(const TokenSequence& predicted, const TokenSequence& lyrics,
                         const ScoringScheme& scheme = {});

enum class Move : std::uint8_t { kDiag, kUp, kLeft, kNone };

/// DP tables of the global alignment; both are (m+1) x (n+1).
struct AlignmentMatrix {
  std::size_t rows = 0;  // m + 1
  std::size_t cols = 0;  // n + 1
  std::vector<int> scores;
  std::vector<Move> moves;

  int F(std::size_t i, std::size_t j) const { return scores[i * cols + j]; }
  Move move(std::size_t i, std::size_t j) const { return moves[i * cols + j]; }
};

/// Fills F(i,j) = max(F(i-1,j-1)+s(i,j), F(i-1,j)+gap, F(i,j-1)+gap). Where
/// several predecessors tie, the recorded move prefers Diag, then Up, then Left.
AlignmentMatrix FillMatrix(const ScoreGrid& substitution, int gap);

struct AlignStep {
  enum class Kind : std::uint8_t {
    kMatch,           // predicted[predicted] paired with lyrics[lyric]
    kGapInPredicted,  // lyrics[lyric] has no predicted partner
    kGapInLyrics,     // predicted[predicted] has no lyric partner
  };
  Kind kind = Kind::kMatch;
  int predicted = -1;
  int lyric = -1;
  bool operator==(const AlignStep&) const = default;
};

struct AlignmentPath {
  std::vector<AlignStep> steps;
  int score = 0;
};

/// Optimal global alignment over a precomputed substitution grid.
AlignmentPath GlobalAlign(const ScoreGrid& substitution, int gap);

/// Optimal global alignment of a predicted transcript against the lyrics.
AlignmentPath Align(const TokenSequence& predicted, const TokenSequence& lyrics,
                    const ScoringScheme& scheme = {});

enum class TimingSource { kMatched, kInterpolated };

struct TimedEntry {
  std::string lyric_token;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  TimingSource source = TimingSource::kMatched;
  bool operator==(const TimedEntry&) const = default;
};

struct TimedLyrics {
  std::vector<TimedEntry> entries;
  bool operator==(const TimedLyrics&) const = default;
};

/// Copies matched intervals onto lyric tokens and subdivides the gaps for
/// unmatched runs uniformly (integer ms, remainder to the last slot).
/// Throws Error(kDegenerateTiming) when the song is too short to give every
/// lyric token at least one millisecond.
TimedLyrics TransferTimings(const AlignmentPath& path, const TokenSequence& predicted,
                            const std::vector<music::TranscriptToken>& transcript,
                            const TokenSequence& lyrics, std::int64_t song_duration_ms);

}  // namespace songcraft::alignment
