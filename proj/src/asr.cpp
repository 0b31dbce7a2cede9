#include "courtside/asr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "courtside/error.hpp"
#include "courtside/extraction.hpp"
#include "courtside/textnorm.hpp"

namespace courtside {

void CorruptionModel::validate() const {
  const std::array<std::pair<const char*, double>, 6> probs{{
      {"name_sub_rate", name_sub_rate},
      {"jargon_corrupt_rate", jargon_corrupt_rate},
      {"accent_rate", accent_rate},
      {"segmentation_rate", segmentation_rate},
      {"prompt_rescue_prob", prompt_rescue_prob},
      {"prompt_hallucination_prob", prompt_hallucination_prob},
  }};
  for (const auto& [name, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, std::string(name) + " must be within [0, 1]");
    }
  }
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

char shifted_vowel(char c) {
  switch (c) {
    case 'a': return 'e';
    case 'e': return 'i';
    case 'i': return 'e';
    case 'o': return 'u';
    default: return 'o';
  }
}

// Swaps one vowel (not the first letter) for a neighbouring one.
std::string vowel_shift(std::string word, double choice) {
  std::vector<std::size_t> spots;
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (is_vowel(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))))) spots.push_back(i);
  }
  if (spots.empty()) return word + "e";
  std::size_t at = spots[std::min(spots.size() - 1, static_cast<std::size_t>(choice * double(spots.size())))];
  word[at] = shifted_vowel(static_cast<char>(std::tolower(static_cast<unsigned char>(word[at]))));
  return word;
}

// Splits after the vowel run closest to the middle: "antetokounmpo" -> "anteto kounmpo".
std::string syllable_split(const std::string& word) {
  std::size_t best = std::string::npos;
  for (std::size_t i = 2; i + 3 < word.size(); ++i) {
    if (is_vowel(word[i]) && !is_vowel(word[i + 1])) {
      auto dist = [&](std::size_t k) { return k > word.size() / 2 ? k - word.size() / 2 : word.size() / 2 - k; };
      if (best == std::string::npos || dist(i + 1) < dist(best)) best = i + 1;
    }
  }
  if (best == std::string::npos) return word;
  return word.substr(0, best) + " " + word.substr(best);
}

struct Rewrite {
  std::string_view from, to;
};

constexpr std::array<Rewrite, 12> kPhonetic{{
    {"ou", "u"}, {"mp", "mb"}, {"oo", "u"}, {"ph", "f"}, {"ck", "k"}, {"th", "t"},
    {"ch", "sh"}, {"ee", "i"}, {"ai", "ay"}, {"ie", "y"}, {"ng", "n"}, {"qu", "kw"},
}};

constexpr std::array<std::pair<std::string_view, std::string_view>, 10> kHomophones{{
    {"break", "brake"}, {"line", "lyin"}, {"shot", "shut"}, {"court", "caught"}, {"block", "black"},
    {"three", "tree"}, {"pass", "past"}, {"foul", "fowl"}, {"lane", "lain"}, {"screen", "scream"},
}};

std::string corrupt_jargon(const std::vector<std::string>& words, const std::string& display, double choice) {
  static const std::array<std::string_view, 6> connectors{"and", "of", "the", "in", "to", "a"};
  if (words.size() >= 3) {
    for (std::size_t i = 1; i + 1 < words.size(); ++i) {
      if (std::find(connectors.begin(), connectors.end(), words[i]) != connectors.end()) {
        // "pick and roll" -> "picker roll"
        std::vector<std::string> out(words.begin(), words.end());
        out[i - 1] += "er";
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
        return join(out, " ");
      }
    }
  }
  if (display.find('-') != std::string::npos) {
    // "alley-oop" -> "alley oops"
    std::string spaced;
    for (char c : display) spaced += (c == '-') ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return normalize_joined(spaced) + "s";
  }
  std::vector<std::string> out(words.begin(), words.end());
  for (const auto& [from, to] : kHomophones) {
    if (out.back() == from) {
      out.back() = std::string(to);
      return join(out, " ");
    }
  }
  out.back() = vowel_shift(out.back(), choice);
  return join(out, " ");
}

bool is_edge_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) && c != '\''; }

struct Tok {
  std::string sep, lead, core, trail;
  std::string norm;
  bool capitalized = false;
  bool dropped = false;
  bool locked = false;  // already rewritten by the hallucination pass
};

std::pair<std::vector<Tok>, std::string> split_tokens(std::string_view text) {
  std::vector<Tok> toks;
  std::size_t i = 0;
  std::string ws;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ws += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view piece = text.substr(i, j - i);
    std::size_t b = 0, e = piece.size();
    while (b < e && is_edge_punct(static_cast<unsigned char>(piece[b]))) ++b;
    while (e > b && is_edge_punct(static_cast<unsigned char>(piece[e - 1]))) --e;
    Tok t;
    t.sep = std::move(ws);
    ws.clear();
    t.lead = std::string(piece.substr(0, b));
    t.core = std::string(piece.substr(b, e - b));
    t.trail = std::string(piece.substr(e));
    t.norm = normalize_joined(t.core);
    t.capitalized = !t.core.empty() && std::isupper(static_cast<unsigned char>(t.core[0]));
    toks.push_back(std::move(t));
    i = j;
  }
  return {std::move(toks), ws};
}

bool ends_sentence(const Tok& t) { return t.trail.find_first_of(".!?") != std::string::npos; }

bool contains_words(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform doubles from the top 53 bits, identical on every platform.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

enum class SiteKind { name, jargon, accent };

struct Site {
  SiteKind kind;
  std::size_t begin, end;  // token range
  std::vector<std::string> words;
  std::string display;
};

}  // namespace

std::string mangle_name_word(std::string_view word_in, double choice) {
  std::string word(word_in);
  std::vector<const Rewrite*> options;
  for (const auto& r : kPhonetic) {
    if (word.find(r.from) != std::string::npos) options.push_back(&r);
  }
  std::string out;
  // One slot beyond the rewrites stands for a plain vowel shift.
  std::size_t pick = static_cast<std::size_t>(choice * double(options.size() + 1));
  if (pick < options.size()) {
    out = word;
    auto at = out.find(options[pick]->from);
    out.replace(at, options[pick]->from.size(), options[pick]->to);
  } else {
    out = vowel_shift(word, choice);
  }
  if (out == word) out = vowel_shift(word, 0.0);
  if (out.size() >= 9) out = syllable_split(out);
  return out;
}

MockLexiconIndex::MockLexiconIndex(const Lexicon& lexicon) : lexicon_(lexicon) {
  for (const auto& e : lexicon.names.entries()) {
    names_[e.normalized] = &e;
    longest_ = std::max(longest_, split_whitespace(e.normalized).size());
    for (const auto& v : e.variants) {
      if (v.find(' ') == std::string::npos && v != e.normalized) ++surnames_[v];
    }
  }
  for (const auto& e : lexicon.jargon.entries()) {
    jargon_[e.normalized] = &e;
    longest_ = std::max(longest_, split_whitespace(e.normalized).size());
  }
}

std::string mock_transcribe(const CorruptionModel& model, std::string_view truth, const MockLexiconIndex& index,
                            const std::optional<std::string>& initial_prompt, std::string_view stream) {
  model.validate();
  auto [toks, tail_ws] = split_tokens(truth);
  const Lexicon& lex = index.lexicon();
  const StopwordSet& stop = default_stopwords();
  const std::vector<std::string> prompt_words = initial_prompt ? normalize(*initial_prompt).words : std::vector<std::string>{};

  // Locate corruption sites, longest lexicon match first.
  std::vector<Site> sites;
  for (std::size_t i = 0; i < toks.size();) {
    if (toks[i].norm.empty()) {
      ++i;
      continue;
    }
    bool found = false;
    for (std::size_t n = std::min(index.longest_entry_words(), toks.size() - i); n >= 1 && !found; --n) {
      std::vector<std::string> parts;
      bool clean = true;
      for (std::size_t k = i; k < i + n; ++k) {
        if (toks[k].norm.empty() || (k + 1 < i + n && !toks[k].trail.empty())) clean = false;
        parts.push_back(toks[k].norm);
      }
      if (!clean) continue;
      std::string phrase = join(parts, " ");
      if (index.is_full_name(phrase)) {
        sites.push_back({SiteKind::name, i, i + n, normalize(phrase).words, canonical_display(phrase, lex)});
      } else if (index.is_jargon(phrase)) {
        sites.push_back({SiteKind::jargon, i, i + n, normalize(phrase).words, canonical_display(phrase, lex)});
      } else if (n == 1 && toks[i].capitalized && index.is_surname(phrase)) {
        sites.push_back({SiteKind::name, i, i + 1, {phrase}, toks[i].core});
      } else {
        continue;
      }
      found = true;
      i += n;
    }
    if (found) continue;
    const std::string& w = toks[i].norm;
    if (w.size() >= 6 && !stop.contains(w) &&
        std::all_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
      sites.push_back({SiteKind::accent, i, i + 1, {w}, toks[i].core});
    }
    ++i;
  }

  Stream rng(splitmix(model.rng_seed ^ splitmix(fnv1a(stream))));
  auto rescued = [&](const std::vector<std::string>& words, double u) {
    return u < model.prompt_rescue_prob && contains_words(prompt_words, words);
  };

  for (const auto& site : sites) {
    // Three draws per site whether or not a prompt is present.
    const double u_hit = rng.next(), u_rescue = rng.next(), u_form = rng.next();
    const double rate = site.kind == SiteKind::name     ? model.name_sub_rate
                        : site.kind == SiteKind::jargon ? model.jargon_corrupt_rate
                                                        : model.accent_rate;
    if (u_hit >= rate || rescued(site.words, u_rescue)) continue;

    std::string replacement;
    switch (site.kind) {
      case SiteKind::name: {
        std::vector<std::string> out;
        for (std::size_t k = 0; k < site.words.size(); ++k) {
          double choice = u_form * double(k + 1);
          out.push_back(mangle_name_word(site.words[k], choice - static_cast<double>(static_cast<long>(choice))));
        }
        replacement = join(out, " ");
        break;
      }
      case SiteKind::jargon: replacement = corrupt_jargon(site.words, site.display, u_form); break;
      case SiteKind::accent: replacement = vowel_shift(site.words[0], u_form); break;
    }
    Tok& first = toks[site.begin];
    first.core = replacement;
    first.norm = normalize_joined(replacement);
    first.trail = toks[site.end - 1].trail;
    for (std::size_t k = site.begin + 1; k < site.end; ++k) toks[k].dropped = true;
  }

  // Sentence ends lose their last word.
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].dropped || !ends_sentence(toks[i]) || toks[i].norm.empty()) continue;
    const double u_hit = rng.next(), u_rescue = rng.next();
    if (u_hit >= model.segmentation_rate || toks[i].core.find(' ') != std::string::npos) continue;
    if (rescued(normalize(toks[i].core).words, u_rescue)) continue;
    toks[i].dropped = true;
    for (std::size_t k = i; k-- > 0;) {
      if (toks[k].dropped) continue;
      if (ends_sentence(toks[k])) break;
      while (!toks[k].trail.empty() && std::string_view(",;:").find(toks[k].trail.back()) != std::string_view::npos) {
        toks[k].trail.pop_back();
      }
      toks[k].trail += toks[i].trail;
      break;
    }
  }

  // Prompted names the audio never contained can still win the decode.
  if (!prompt_words.empty() && model.prompt_hallucination_prob > 0.0) {
    Stream halluc(splitmix(model.rng_seed ^ splitmix(fnv1a(stream) ^ 0x68616c6c75636eULL)));
    const std::vector<std::string> truth_words = normalize(truth).words;
    std::vector<std::string> spoken_surnames;
    for (const auto& site : sites) {
      if (site.kind == SiteKind::name) spoken_surnames.push_back(site.words.back());
    }
    for (const auto& entry : lex.names.entries()) {
      auto words = normalize(entry.normalized).words;
      if (!contains_words(prompt_words, words) || contains_words(truth_words, words)) continue;
      // A surname said as a name counts as the name being present.
      bool spoken = std::any_of(entry.variants.begin(), entry.variants.end(), [&](const std::string& v) {
        return std::find(spoken_surnames.begin(), spoken_surnames.end(), v) != spoken_surnames.end();
      });
      if (spoken) continue;
      if (halluc.next() >= model.prompt_hallucination_prob) continue;

      double best = -1.0;
      std::size_t best_begin = 0, best_end = 0;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        std::vector<std::size_t> live;
        for (std::size_t k = i; k < toks.size() && live.size() < 3; ++k) {
          if (toks[k].dropped) continue;
          if (toks[k].locked || toks[k].norm.empty()) break;
          live.push_back(k);
          std::vector<std::string> parts;
          for (auto idx : live) parts.push_back(toks[idx].norm);
          double s = entry_similarity(join(parts, " "), entry);
          if (s >= 0.5 && s > best) {
            best = s;
            best_begin = i;
            best_end = k + 1;
          }
          if (!toks[k].trail.empty()) break;
        }
      }
      if (best < 0.0) continue;
      Tok& first = toks[best_begin];
      std::string trail;
      for (std::size_t k = best_begin; k < best_end; ++k) {
        if (!toks[k].dropped) trail = toks[k].trail;
      }
      first.core = entry.display;
      first.norm = entry.normalized;
      first.trail = trail;
      first.locked = true;
      for (std::size_t k = best_begin + 1; k < best_end; ++k) toks[k].dropped = true;
    }
  }

  std::string out;
  for (const auto& t : toks) {
    if (t.dropped) continue;
    out += t.sep.empty() && !out.empty() ? " " : t.sep;
    out += t.lead + t.core + t.trail;
  }
  return out + tail_ws;
}

std::string mock_transcribe(const CorruptionModel& model, std::string_view truth, const Lexicon& lexicon,
                            const std::optional<std::string>& initial_prompt, std::string_view stream) {
  return mock_transcribe(model, truth, MockLexiconIndex(lexicon), initial_prompt, stream);
}

MockAsrBackend::MockAsrBackend(CorruptionModel model, const Lexicon& lexicon, std::map<std::string, std::string> truths)
    : model_(model), index_(lexicon), truths_(std::move(truths)) {
  model_.validate();
}

std::string MockAsrBackend::transcribe(const std::string& audio_ref, const std::optional<std::string>& initial_prompt) {
  ++calls_;
  if (initial_prompt) ++prompted_calls_;
  std::string truth;
  if (auto it = truths_.find(audio_ref); it != truths_.end()) {
    truth = it->second;
  } else {
    std::ifstream in(audio_ref, std::ios::binary);
    if (!in) throw Error(ErrorCode::asr, "mock backend has no truth for '" + audio_ref + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    truth = ss.str();
  }
  return mock_transcribe(model_, truth, index_, initial_prompt, audio_ref);
}

}  // namespace courtside
