#include "songcraft/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <thread>

#include "songcraft/errors.hpp"
#include "text_util.hpp"

namespace songcraft::gateway {

namespace {

bool IsAlnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

const std::regex& PrefixPattern() {
  static const std::regex pattern(
      R"(^[ \t]*(\[\s*\d{1,4}[-/:]\d[^\]\n]*\]|\(\s*\d{1,4}[-/:]\d[^)\n]*\)|\d{4}-\d{2}-\d{2}([ T]\d{1,2}:\d{2}(:\d{2})?)?|\d{1,2}:\d{2}(:\d{2})?(\s?[AaPp][Mm])?|[Bb][Oo][Tt][ \t]*:|[Aa][Ss][Ss][Ii][Ss][Tt][Aa][Nn][Tt][ \t]*:)[ \t]*([-|][ \t]*)?)");
  return pattern;
}

std::string StripLine(std::string line) {
  std::smatch m;
  while (std::regex_search(line, m, PrefixPattern()) && m.length(0) > 0) {
    line.erase(0, static_cast<std::size_t>(m.length(0)));
  }
  return line;
}

struct QuotePair {
  std::string_view open;
  std::string_view close;
};

constexpr QuotePair kQuotes[] = {
    {"'", "'"}, {"\"", "\""}, {"`", "'"}, {"`", "`"},
    {"\xE2\x80\x98", "\xE2\x80\x99"},  // single curly quotes
    {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // double curly quotes
};

/// Quoted candidates in `region`. An opening quote follows a non-word
/// character; a closing quote is not followed by a letter or digit.
std::vector<std::string> QuotedItems(std::string_view region) {
  std::vector<std::string> items;
  std::size_t i = 0;
  while (i < region.size()) {
    bool advanced = false;
    if (i == 0 || !IsAlnum(region[i - 1])) {
      for (const auto& q : kQuotes) {
        if (region.substr(i, q.open.size()) != q.open) continue;
        const std::size_t body = i + q.open.size();
        if (body >= region.size() || region[body] == ' ') continue;
        std::size_t close = body;
        while ((close = region.find(q.close, close)) != std::string_view::npos) {
          const std::size_t after = close + q.close.size();
          if (after >= region.size() || !IsAlnum(region[after])) break;
          ++close;
        }
        if (close == std::string_view::npos) continue;
        auto item = text::Trim(region.substr(body, close - body));
        while (!item.empty() && (item.back() == ',' || item.back() == '.')) item.pop_back();
        if (!item.empty()) items.push_back(item);
        i = close + q.close.size();
        advanced = true;
        break;
      }
    }
    if (!advanced) ++i;
  }
  return items;
}

constexpr std::string_view kExampleMarkers[] = {"for example", "for instance", "e.g.", "such as"};

bool BoundaryBefore(std::string_view s, std::size_t pos) { return pos == 0 || !IsAlnum(s[pos - 1]); }

/// The sentence following an example marker: stops at a terminal mark
/// outside quotes or at the end of the line.
std::string_view SentenceFrom(std::string_view s, std::size_t start) {
  bool in_double = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') in_double = !in_double;
    if (c == '\n') return s.substr(start, i - start);
    if (!in_double && (c == '.' || c == '?' || c == '!')) {
      const bool inside_word = i + 1 < s.size() && IsAlnum(s[i + 1]) && i > 0 && IsAlnum(s[i - 1]);
      if (!inside_word) return s.substr(start, i - start);
    }
  }
  return s.substr(start);
}

std::vector<std::string> BulletItems(std::string_view s, std::size_t start) {
  static const std::regex bullet(R"(^\s*(?:[-*]|\xE2\x80\xA2|\d{1,2}[.)])\s+(.+?)\s*$)");
  std::vector<std::string> items;
  std::size_t pos = s.find('\n', start);
  while (pos != std::string_view::npos) {
    const std::size_t next = s.find('\n', pos + 1);
    const std::string line(s.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos : next - pos - 1));
    std::smatch m;
    if (!std::regex_match(line, m, bullet)) {
      if (!text::Trim(line).empty() || !items.empty()) break;
    } else {
      items.push_back(m[1].str());
    }
    pos = next;
  }
  return items;
}

std::size_t WordCount(std::string_view s) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = c == ' ' || c == '\t';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::vector<std::string> CommaItems(std::string_view region) {
  std::string flat = text::ReplaceAll(std::string(region), " or ", ", ");
  flat = text::ReplaceAll(std::move(flat), " and ", ", ");
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= flat.size()) {
    const auto comma = flat.find(',', start);
    auto item = text::Trim(std::string_view(flat).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    for (std::string_view lead : {"or ", "and ", "like "}) {
      if (item.rfind(lead, 0) == 0) item = text::Trim(std::string_view(item).substr(lead.size()));
    }
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (items.size() < 2) return {};
  for (const auto& item : items) {
    if (WordCount(item) > 3) return {};
  }
  return items;
}

std::vector<std::string> Dedupe(std::vector<std::string> items) {
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (auto& item : items) {
    auto key = text::Lower(item);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(std::move(key));
    out.push_back(std::move(item));
  }
  return out;
}

std::string StripFences(std::string s) {
  s = text::Trim(s);
  if (s.rfind("```", 0) == 0) {
    const auto nl = s.find('\n');
    const auto end = s.rfind("```");
    if (nl != std::string::npos && end != std::string::npos && end > nl) s = text::Trim(s.substr(nl + 1, end - nl - 1));
  }
  return s;
}

std::optional<nlohmann::json> ParseObject(std::string_view raw) {
  const std::string body = StripFences(std::string(raw));
  auto attempt = [](std::string_view s) -> std::optional<nlohmann::json> {
    auto j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
  };
  if (auto j = attempt(body)) return j;
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    return attempt(std::string_view(body).substr(open, close - open + 1));
  }
  return std::nullopt;
}

}  // namespace

std::string Sanitize(std::string_view reply) {
  std::string out;
  std::size_t start = 0;
  while (true) {
    const auto nl = reply.find('\n', start);
    std::string line(reply.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out += StripLine(std::move(line));
    if (nl == std::string_view::npos) break;
    out += '\n';
    start = nl + 1;
  }
  return text::Trim(out);
}

std::vector<std::string> ParseOptionChips(std::string_view reply) {
  const std::string lower = text::Lower(reply);
  std::vector<std::pair<std::size_t, std::size_t>> hits;  // (position, marker length)
  for (auto marker : kExampleMarkers) {
    for (auto pos = lower.find(marker); pos != std::string::npos; pos = lower.find(marker, pos + 1)) {
      if (BoundaryBefore(lower, pos)) hits.emplace_back(pos, marker.size());
    }
  }
  std::sort(hits.begin(), hits.end());
  for (const auto& [pos, len] : hits) {
    std::size_t start = pos + len;
    while (start < reply.size() && (reply[start] == ' ' || reply[start] == ',' || reply[start] == ':')) ++start;
    const auto sentence = SentenceFrom(reply, start);
    auto items = QuotedItems(sentence);
    if (items.empty() && text::Trim(sentence).empty()) items = BulletItems(reply, start);
    if (items.empty()) items = CommaItems(sentence);
    if (!items.empty()) return Dedupe(std::move(items));
  }
  return {};
}

const std::vector<std::string>& DefaultCrisisLexicon() {
  static const std::vector<std::string> lexicon{
      "suicide",       "suicidal",    "kill myself", "killing myself", "self-harm",
      "self harm",     "hurt myself", "end my life", "want to die",    "no reason to live",
  };
  return lexicon;
}

bool MatchesCrisisLexicon(std::string_view text, const std::vector<std::string>& lexicon) {
  const auto lower = text::Lower(text);
  for (const auto& entry : lexicon) {
    if (text::ContainsWord(lower, text::Lower(entry))) return true;
  }
  return false;
}

std::size_t CountSentenceMarks(std::string_view text) {
  std::size_t marks = 0;
  bool in_run = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool terminal = c == '!' || c == '?' ||
                          (c == '.' && !(i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                                         std::isdigit(static_cast<unsigned char>(text[i + 1]))));
    if (terminal && !in_run) ++marks;
    in_run = terminal;
  }
  return marks;
}

ExtractionResult ParseExtraction(std::string_view raw, const std::vector<dialogue::VariableId>& requested,
                                 const dialogue::RequiredVariableSet& schema) {
  ExtractionResult result;
  result.raw_backend_text = std::string(raw);
  auto doc = ParseObject(raw);
  if (!doc) throw ExtractionFailed("extraction reply is not a JSON object", std::string(raw));

  for (const auto& [key, value] : doc->items()) {
    if (std::find(requested.begin(), requested.end(), key) == requested.end()) {
      result.warnings.push_back("dropped unknown key " + key);
      continue;
    }
    if (value.is_null()) continue;
    const auto kind = schema.at(key).kind;
    nlohmann::json candidate = value;
    if (kind == dialogue::VariableKind::kText) {
      if (value.is_number() || value.is_boolean()) {
        candidate = value.dump();
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!item.is_string()) {
            joined.clear();
            break;
          }
          if (!joined.empty()) joined += ", ";
          joined += item.get<std::string>();
        }
        candidate = joined;
      }
      if (!candidate.is_string() || text::Trim(candidate.get<std::string>()).empty()) {
        result.warnings.push_back("ignored empty or non-text value for " + key);
        continue;
      }
      candidate = text::Trim(candidate.get<std::string>());
      if (key == "lyrics_sentence" && CountSentenceMarks(candidate.get<std::string>()) < kMinLyricsSentences) {
        result.warnings.push_back("lyrics_sentence needs at least 3 sentences");
        continue;
      }
    }
    auto parsed = dialogue::ValueFromJson(kind, candidate);
    if (!parsed) {
      result.warnings.push_back("value for " + key + " does not match its schema");
      continue;
    }
    result.values.emplace(key, std::move(*parsed));
  }
  return result;
}

// --- Gateway ----------------------------------------------------------------------

Gateway::Gateway(ChatBackend& backend, GatewayOptions options) : backend_(backend), options_(std::move(options)) {}

std::string Gateway::Call(const prompt::PromptBundle& bundle, std::uint64_t call_index) {
  BackendRequest request{bundle.kind, bundle.rendered_text, bundle.digest, bundle.section_digests, call_index};
  for (int attempt = 0;; ++attempt) {
    try {
      return backend_.Complete(request);
    } catch (const Error& e) {
      if (!e.retryable() || attempt >= options_.max_retries) throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kBackend, e.what());
    }
    std::this_thread::sleep_for(options_.base_backoff * (1 << attempt));
  }
}

ChatTurn Gateway::CompleteDialogue(const prompt::PromptBundle& bundle, std::uint64_t call_index,
                                   std::vector<std::string>* warnings) {
  if (bundle.kind != prompt::PromptKind::kDialogue) {
    throw Error(ErrorCode::kContractViolation, "CompleteDialogue needs a dialogue prompt");
  }
  const std::string raw = Call(bundle, call_index);
  ChatTurn turn;
  turn.speaker = Speaker::kAgent;
  turn.text = Sanitize(raw);
  if (warnings && turn.text != text::Trim(raw)) warnings->push_back("reply prefix removed");
  if (turn.text.empty()) throw Error(ErrorCode::kBackend, "backend returned an empty reply");
  turn.option_chips = ParseOptionChips(turn.text);
  turn.crisis_flagged = MatchesCrisisLexicon(turn.text, options_.crisis_lexicon);
  if (bundle.state_ref) turn.state_at = *bundle.state_ref;
  return turn;
}

ExtractionResult Gateway::ExtractVariables(const prompt::PromptBundle& bundle, const dialogue::TherapyStep& step,
                                           const dialogue::RequiredVariableSet& vars, std::uint64_t call_index) {
  if (bundle.kind != prompt::PromptKind::kExtraction) {
    throw Error(ErrorCode::kContractViolation, "ExtractVariables needs an extraction prompt");
  }
  for (const auto& id : bundle.requested_variables) {
    if (std::find(step.required_variables.begin(), step.required_variables.end(), id) ==
        step.required_variables.end()) {
      throw Error(ErrorCode::kContractViolation, "extraction prompt requests " + id + " outside step " + step.name);
    }
  }
  return ParseExtraction(Call(bundle, call_index), bundle.requested_variables, vars);
}

std::string Gateway::Generate(const prompt::PromptBundle& bundle, std::uint64_t call_index) {
  if (bundle.kind != prompt::PromptKind::kGeneration) {
    throw Error(ErrorCode::kContractViolation, "Generate needs a generation prompt");
  }
  return Sanitize(Call(bundle, call_index));
}

}  // namespace songcraft::gateway
