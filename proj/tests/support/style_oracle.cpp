#include "style_oracle.hpp"

#include <cctype>
#include <random>
#include <set>

#include "songcraft/errors.hpp"

namespace songcraft::testing {

std::string LowerAscii(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(", ", start);
    out.push_back(s.substr(start, at == std::string::npos ? std::string::npos : at - start));
    if (at == std::string::npos) break;
    start = at + 2;
  }
  return out;
}

std::vector<std::string> OracleKeywords(const music::MusicComponents& c) {
  std::vector<std::string> all;
  for (const auto* f : {&c.genre, &c.mood, &c.tempo, &c.dynamics, &c.rhythm, &c.vocal_tone}) {
    if (*f && !f->value().empty()) all.push_back(**f);
  }
  for (const auto& i : c.instrumentation) {
    if (!i.empty()) all.push_back(i);
  }
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const auto& k : all) {
    if (seen.insert(LowerAscii(k)).second) unique.push_back(k);
  }
  std::size_t length = 0;
  std::vector<std::string> out;
  for (const auto& k : unique) {
    const std::size_t next = length + (out.empty() ? 0 : 2) + k.size();
    if (next > music::kMaxStylePromptChars) break;
    length = next;
    out.push_back(k);
  }
  return out;
}

std::string RandomStylePromptCheck(int rounds, unsigned seed) {
  std::mt19937 rng(seed);
  const std::string alphabet = "abcdefgh";
  auto word = [&] {
    std::string w;
    const int n = 1 + static_cast<int>(rng() % 14);
    for (int i = 0; i < n; ++i) w.push_back(alphabet[rng() % alphabet.size()]);
    if (rng() % 4 == 0) w[0] = static_cast<char>(std::toupper(w[0]));
    return w;
  };
  auto maybe = [&]() -> std::optional<std::string> {
    if (rng() % 3 == 0) return std::nullopt;
    return word();
  };
  for (int round = 0; round < rounds; ++round) {
    music::MusicComponents c;
    c.genre = maybe();
    c.mood = maybe();
    if (!c.genre && !c.mood) c.mood = word();
    c.tempo = maybe();
    c.dynamics = maybe();
    c.rhythm = maybe();
    c.vocal_tone = maybe();
    for (int i = static_cast<int>(rng() % 20); i > 0; --i) {
      c.instrumentation.push_back(rng() % 5 || c.instrumentation.empty() ? word() : c.instrumentation[0]);
    }
    const auto at = "round " + std::to_string(round) + ": ";
    music::StylePrompt p;
    try {
      p = music::BuildStylePrompt(c);
    } catch (const Error& e) {
      return at + e.what();
    }
    if (p.rendered_text.size() > music::kMaxStylePromptChars) return at + "too long: " + p.rendered_text;
    if (SplitComma(p.rendered_text) != p.keywords) return at + "not comma-separated: " + p.rendered_text;
    std::set<std::string> lowered;
    for (const auto& k : p.keywords) {
      if (k.empty()) return at + "empty keyword";
      if (!lowered.insert(LowerAscii(k)).second) return at + "duplicate " + k;
    }
    if (p.keywords != OracleKeywords(c)) return at + "differs from oracle: " + p.rendered_text;
  }
  return "";
}

}  // namespace songcraft::testing
