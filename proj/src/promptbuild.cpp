#include "courtside/promptbuild.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t heuristic_tokens(std::size_t words) { return (3 * words + 1) / 2; }

// Start offsets of whitespace-separated words.
std::vector<std::size_t> word_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_space(static_cast<unsigned char>(text[i])) && (i == 0 || is_space(static_cast<unsigned char>(text[i - 1])))) {
      starts.push_back(i);
    }
  }
  return starts;
}

}  // namespace

std::size_t HeuristicTokenizer::count(std::string_view text) const {
  return heuristic_tokens(word_starts(text).size());
}

std::string HeuristicTokenizer::tail(std::string_view text, std::size_t max_tokens) const {
  auto starts = word_starts(text);
  std::size_t keep = starts.size();
  while (keep > 0 && heuristic_tokens(keep) > max_tokens) --keep;
  if (keep == starts.size()) return std::string(text);
  if (keep == 0) return {};
  return std::string(text.substr(starts[starts.size() - keep]));
}

// --- byte-level BPE --------------------------------------------------------

namespace {

// The GPT-2 reversible byte -> printable code point table, UTF-8 encoded.
const std::array<std::string, 256>& byte_alphabet() {
  static const std::array<std::string, 256> table = [] {
    std::array<std::string, 256> out;
    auto printable = [](int b) { return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF); };
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      UChar32 cp = printable(b) ? b : 256 + extra++;
      char buf[4];
      int32_t len = 0;
      [[maybe_unused]] UBool err = false;
      U8_APPEND(buf, len, 4, cp, err);
      out[b].assign(buf, static_cast<std::size_t>(len));
    }
    return out;
  }();
  return table;
}

enum class CharClass { letter, number, space, other };

CharClass classify(UChar32 c) {
  if (c < 0) return CharClass::other;
  auto mask = U_GET_GC_MASK(c);
  if (mask & U_GC_L_MASK) return CharClass::letter;
  if (mask & U_GC_N_MASK) return CharClass::number;
  if (u_isUWhiteSpace(c)) return CharClass::space;
  return CharClass::other;
}

struct Cursor {
  std::string_view s;

  UChar32 at(std::size_t i, std::size_t* next) const {
    int32_t pos = static_cast<int32_t>(i);
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos, static_cast<int32_t>(s.size()), c);
    *next = static_cast<std::size_t>(pos);
    return c;
  }
  CharClass cls(std::size_t i) const {
    std::size_t n;
    return classify(at(i, &n));
  }
  std::size_t skip(std::size_t i, CharClass c) const {
    while (i < s.size()) {
      std::size_t n;
      if (classify(at(i, &n)) != c) break;
      i = n;
    }
    return i;
  }
  std::size_t skip_other(std::size_t i) const {
    while (i < s.size()) {
      std::size_t n;
      if (classify(at(i, &n)) != CharClass::other) break;
      i = n;
    }
    return i;
  }
};

// Splits like 's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> out;
  Cursor cur{text};
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\'') {
      std::size_t len = 0;
      for (std::string_view c : {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"}) {
        if (text.substr(i, c.size()) == c) {
          len = c.size();
          break;
        }
      }
      if (len != 0) {
        out.push_back(text.substr(i, len));
        i += len;
        continue;
      }
    }
    std::size_t body = i;
    CharClass c = cur.cls(i);
    if (text[i] == ' ' && i + 1 < text.size() && cur.cls(i + 1) != CharClass::space) {
      body = i + 1;
      c = cur.cls(body);
    }
    std::size_t end;
    if (c == CharClass::letter || c == CharClass::number) {
      end = cur.skip(body, c);
    } else if (c == CharClass::other) {
      end = cur.skip_other(body);
    } else {
      end = cur.skip(i, CharClass::space);
      // \s+(?!\S): leave the last whitespace char to prefix the next word.
      if (end < text.size()) {
        std::size_t last = i, n = i;
        while (n < end) {
          last = n;
          cur.at(n, &n);
        }
        if (last > i) end = last;
      }
    }
    out.push_back(text.substr(i, end - i));
    i = end;
  }
  return out;
}

}  // namespace

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& vocab_json, const std::filesystem::path& merges_txt) {
  BpeTokenizer tok;
  std::ifstream vin(vocab_json);
  if (!vin) throw Error(ErrorCode::io, "cannot open tokenizer vocabulary " + vocab_json.string());
  try {
    auto vocab = nlohmann::json::parse(vin);
    for (auto it = vocab.begin(); it != vocab.end(); ++it) tok.vocab_.emplace(it.key(), it.value().get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, vocab_json.string() + ": " + e.what());
  }

  std::ifstream min(merges_txt);
  if (!min) throw Error(ErrorCode::io, "cannot open tokenizer merges " + merges_txt.string());
  std::string line;
  int rank = 0;
  while (std::getline(min, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("#version")) continue;
    if (std::count(line.begin(), line.end(), ' ') != 1) {
      throw Error(ErrorCode::parse, merges_txt.string() + ": malformed merge line '" + line + "'");
    }
    tok.ranks_.emplace(line, rank++);
  }
  return tok;
}

std::vector<std::string> BpeTokenizer::bpe(const std::string& word) const {
  const auto& alphabet = byte_alphabet();
  std::vector<std::string> symbols;
  for (unsigned char b : word) symbols.push_back(alphabet[b]);

  while (symbols.size() > 1) {
    int best = std::numeric_limits<int>::max();
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find(symbols[i] + " " + symbols[i + 1]);
      if (it != ranks_.end() && it->second < best) {
        best = it->second;
        at = i;
      }
    }
    if (best == std::numeric_limits<int>::max()) break;
    const std::string left = symbols[at], right = symbols[at + 1];
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        merged.push_back(left + right);
        i += 2;
      } else {
        merged.push_back(symbols[i++]);
      }
    }
    symbols = std::move(merged);
  }
  return symbols;
}

std::vector<std::string> BpeTokenizer::encode(std::string_view text) const {
  std::vector<std::string> out;
  for (auto word : pretokenize(text)) {
    for (auto& t : bpe(std::string(word))) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> BpeTokenizer::pieces(std::string_view text) const {
  // Each symbol is a run of byte-alphabet characters, so the byte count of a
  // token equals the number of code points it holds.
  std::vector<std::string> out;
  std::size_t offset = 0;
  for (auto word : pretokenize(text)) {
    std::size_t local = 0;
    for (const auto& token : bpe(std::string(word))) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < token.size(); ++n) U8_FWD_1_UNSAFE(token.data(), i);
      out.emplace_back(text.substr(offset + local, n));
      local += n;
    }
    offset += word.size();
  }
  return out;
}

std::size_t BpeTokenizer::count(std::string_view text) const { return encode(text).size(); }

std::string BpeTokenizer::tail(std::string_view text, std::size_t max_tokens) const {
  auto parts = pieces(text);
  if (parts.size() <= max_tokens) return std::string(text);
  std::string out;
  for (std::size_t i = parts.size() - max_tokens; i < parts.size(); ++i) out += parts[i];
  return out;
}

// --- budget and assembly ---------------------------------------------------

void TokenBudget::validate() const {
  if (hard_limit != kWhisperPromptWindow) {
    throw Error(ErrorCode::invalid_argument, "prompt hard limit is fixed at 224 tokens");
  }
  if (target_limit == 0 || target_limit > hard_limit) {
    throw Error(ErrorCode::invalid_argument, "prompt target limit must be in (0, 224]");
  }
}

std::size_t count_tokens(std::string_view text, const TokenBudget& budget) {
  if (budget.tokenizer) return budget.tokenizer->count(text);
  return HeuristicTokenizer{}.count(text);
}

std::string truncate_to_window(std::string_view prompt, const TokenBudget& budget) {
  if (budget.tokenizer) return budget.tokenizer->tail(prompt, budget.hard_limit);
  return HeuristicTokenizer{}.tail(prompt, budget.hard_limit);
}

std::string join_list(std::span<const std::string> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

std::string template_sentence(const std::string& topic, std::span<const std::string> names,
                              std::span<const std::string> jargon) {
  std::string out = trim(topic);
  while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?')) out.pop_back();
  if (!names.empty()) out += " featuring " + join_list(names);
  if (!jargon.empty()) out += " with " + join_list(jargon);
  return out.ends_with('.') ? out : out + ".";
}

namespace {

std::string one_line(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  return trim(text);
}

std::string safe_build(const SentenceBuilder& builder, const std::string& topic, const std::vector<std::string>& names,
                       const std::vector<std::string>& jargon) {
  try {
    return one_line(builder(topic, names, jargon));
  } catch (const std::exception&) {
    return template_sentence(topic, names, jargon);
  }
}

}  // namespace

ContextPrompt build_prompt(const std::string& topic, std::vector<std::string> names, std::vector<std::string> jargon,
                           const TokenBudget& budget, const SentenceBuilder& builder) {
  budget.validate();
  if (trim(topic).empty()) throw Error(ErrorCode::invalid_argument, "build_prompt needs a topic");

  std::string text = safe_build(builder, topic, names, jargon);
  while (count_tokens(text, budget) > budget.target_limit) {
    if (!jargon.empty()) {
      jargon.pop_back();
    } else if (names.size() > 2) {
      names.pop_back();
    } else {
      break;
    }
    text = safe_build(builder, topic, names, jargon);
  }
  while (count_tokens(text, budget) > budget.hard_limit && !names.empty()) {
    names.pop_back();
    text = safe_build(builder, topic, names, jargon);
  }
  if (count_tokens(text, budget) > budget.hard_limit) text = truncate_to_window(text, budget);

  // Report only the parts the final text actually carries.
  std::erase_if(names, [&](const std::string& n) { return text.find(n) == std::string::npos; });
  std::erase_if(jargon, [&](const std::string& j) { return text.find(j) == std::string::npos; });

  ContextPrompt prompt;
  prompt.token_count = count_tokens(text, budget);
  prompt.text = std::move(text);
  prompt.topic = trim(topic);
  prompt.names = std::move(names);
  prompt.jargon = std::move(jargon);
  return prompt;
}

}  // namespace courtside
