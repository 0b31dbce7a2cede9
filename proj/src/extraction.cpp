#include "courtside/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "courtside/error.hpp"

namespace courtside {

const char* to_string(ExtractionMethod method) noexcept {
  switch (method) {
    case ExtractionMethod::rake: return "rake";
    case ExtractionMethod::yake: return "yake";
    case ExtractionMethod::tfidf: return "tfidf";
  }
  return "?";
}

namespace {

bool is_fragment_break(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) && c != '\'' && c != '-';
}

bool is_sentence_break(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

// Normalized word runs between delimiter characters.
std::vector<std::vector<std::string>> split_normalized(std::string_view text, bool (*is_break)(char)) {
  std::vector<std::vector<std::string>> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_break(text[i])) {
      auto words = normalize(text.substr(start, i - start)).words;
      if (!words.empty()) parts.push_back(std::move(words));
      start = i + 1;
    }
  }
  return parts;
}

void sort_terms(std::vector<ScoredTerm>& terms) {
  std::sort(terms.begin(), terms.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
}

std::vector<std::string> builtin_stopword_list() {
  return {"a",     "about", "above", "after", "again", "against", "all",   "am",    "an",
          "and",   "any",   "are",   "as",    "at",    "be",      "been",  "before", "being",
          "below", "between", "both", "but",  "by",    "can",     "did",   "do",    "does",
          "doing", "down",  "during", "each", "few",   "for",     "from",  "further", "had",
          "has",   "have",  "having", "he",   "her",   "here",    "hers",  "herself", "him",
          "himself", "his", "how",   "i",     "if",    "in",      "into",  "is",    "it",
          "its",   "itself", "just", "me",    "more",  "most",    "my",    "myself", "no",
          "nor",   "not",   "now",   "of",    "off",   "on",      "once",  "only",  "or",
          "other", "our",   "ours",  "out",   "over",  "own",     "same",  "she",   "should",
          "so",    "some",  "such",  "than",  "that",  "thats",   "the",   "their", "theirs",
          "them",  "then",  "there", "these", "they",  "this",    "those", "through", "to",
          "too",   "under", "until", "up",    "very",  "was",     "we",    "were",  "what",
          "when",  "where", "which", "while", "who",   "whom",    "why",   "will",  "with",
          "you",   "your",  "yours"};
}

std::size_t count_occurrences(std::span<const std::string> haystack, std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  }
  return n;
}

// Every n-gram (n <= max_ngram) inside each part that neither starts nor ends
// with a stopword, paired with its occurrence count.
std::map<std::string, std::size_t> bounded_ngrams(const std::vector<std::vector<std::string>>& parts,
                                                  std::size_t max_ngram, const StopwordSet& stop) {
  std::map<std::string, std::size_t> grams;
  for (const auto& words : parts) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (stop.contains(words[i])) continue;
      std::string gram;
      for (std::size_t n = 1; n <= max_ngram && i + n <= words.size(); ++n) {
        const std::string& last = words[i + n - 1];
        if (n > 1) gram += ' ';
        gram += last;
        if (!stop.contains(last)) ++grams[gram];
      }
    }
  }
  return grams;
}

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet set = [] {
    auto words = builtin_stopword_list();
    return StopwordSet(words.begin(), words.end());
  }();
  return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet set;
  for (const auto& line : read_entry_lines(path)) {
    std::string word = normalize_joined(line);
    if (!word.empty()) set.insert(std::move(word));
  }
  return set;
}

std::uint64_t FrequencyTable::count(const std::string& word) const {
  auto it = counts.find(word);
  return it == counts.end() ? 0 : it->second;
}

void FrequencyTable::add(const std::string& word, std::uint64_t n) {
  counts[word] += n;
  total += n;
}

FrequencyTable FrequencyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  FrequencyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string word;
    std::uint64_t n = 0;
    if (!(fields >> word)) continue;
    if (!(fields >> n)) {
      throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": expected \"word count\"");
    }
    table.add(normalize_joined(word), n);
  }
  return table;
}

std::uint64_t DocFrequencyTable::frequency(const std::string& term) const {
  auto it = df.find(term);
  return it == df.end() ? 0 : it->second;
}

DocFrequencyTable DocFrequencyTable::from_background(const FrequencyTable& background) {
  DocFrequencyTable table;
  table.documents = std::max<std::uint64_t>(background.total, 1);
  table.df = background.counts;
  return table;
}

DocFrequencyTable DocFrequencyTable::from_documents(std::span<const std::string> documents) {
  DocFrequencyTable table;
  table.documents = std::max<std::size_t>(documents.size(), 1);
  for (const auto& doc : documents) {
    auto words = normalize(doc).words;
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (const auto& w : words) ++table.df[w];
  }
  return table;
}

std::vector<ScoredTerm> rake_keywords(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::vector<std::string>> phrases;
  for (const auto& fragment : split_normalized(text, is_fragment_break)) {
    std::vector<std::string> run;
    for (const auto& word : fragment) {
      if (stopwords.contains(word)) {
        if (!run.empty()) phrases.push_back(std::move(run));
        run.clear();
      } else {
        run.push_back(word);
      }
    }
    if (!run.empty()) phrases.push_back(std::move(run));
  }

  std::map<std::string, double> frequency, degree;
  for (const auto& phrase : phrases) {
    for (const auto& word : phrase) {
      frequency[word] += 1.0;
      degree[word] += static_cast<double>(phrase.size());
    }
  }

  std::map<std::string, double> scores;
  for (const auto& phrase : phrases) {
    double score = 0.0;
    for (const auto& word : phrase) score += degree[word] / frequency[word];
    scores.emplace(join(phrase, " "), score);
  }

  std::vector<ScoredTerm> out;
  for (auto& [term, score] : scores) out.push_back({term, score, ExtractionMethod::rake});
  sort_terms(out);
  return out;
}

std::vector<ScoredTerm> yake_keywords(std::string_view text, std::size_t max_ngram,
                                      const StopwordSet& stopwords) {
  if (max_ngram == 0) throw Error(ErrorCode::invalid_argument, "max_ngram must be >= 1");
  const auto sentences = split_normalized(text, is_sentence_break);
  if (sentences.empty()) return {};

  struct WordStats {
    double tf = 0;
    std::size_t first_sentence = 0;
    std::size_t sentence_count = 0;
  };
  std::map<std::string, WordStats> stats;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::unordered_set<std::string> seen;
    for (const auto& word : sentences[s]) {
      auto [it, inserted] = stats.try_emplace(word);
      if (inserted) it->second.first_sentence = s;
      it->second.tf += 1.0;
      if (seen.insert(word).second) ++it->second.sentence_count;
    }
  }
  double max_tf = 0.0;
  for (const auto& [word, st] : stats) {
    if (!stopwords.contains(word)) max_tf = std::max(max_tf, st.tf);
  }
  if (max_tf == 0.0) return {};

  const double sentence_total = static_cast<double>(sentences.size());
  auto word_score = [&](const std::string& word) {
    const WordStats& st = stats.at(word);
    double position = std::log(3.0 + static_cast<double>(st.first_sentence));
    double frequency = st.tf / max_tf;
    double dispersion = static_cast<double>(st.sentence_count) / sentence_total;
    return position / (frequency + dispersion);
  };

  std::vector<ScoredTerm> out;
  for (const auto& [gram, tf] : bounded_ngrams(sentences, max_ngram, stopwords)) {
    double product = 1.0, sum = 0.0;
    for (const auto& word : split_whitespace(gram)) {
      if (stopwords.contains(word)) continue;
      double h = word_score(word);
      product *= h;
      sum += h;
    }
    double yake = product / (static_cast<double>(tf) * (1.0 + sum));
    out.push_back({gram, 1.0 / (1.0 + yake), ExtractionMethod::yake});
  }
  sort_terms(out);
  return out;
}

std::vector<ScoredTerm> tfidf_terms(std::string_view doc, const DocFrequencyTable& corpus,
                                    std::size_t max_ngram, const StopwordSet& stopwords) {
  if (corpus.documents == 0) throw Error(ErrorCode::invalid_argument, "corpus must hold at least one document");
  const double documents = static_cast<double>(corpus.documents);
  std::vector<ScoredTerm> out;
  for (const auto& [gram, tf] : bounded_ngrams(split_normalized(doc, is_fragment_break), max_ngram, stopwords)) {
    std::uint64_t df = corpus.frequency(gram);
    if (df == 0 && gram.find(' ') != std::string::npos) {
      std::uint64_t bound = corpus.documents;
      for (const auto& word : split_whitespace(gram)) {
        if (!stopwords.contains(word)) bound = std::min(bound, corpus.frequency(word));
      }
      df = bound;
    }
    double idf = std::log((1.0 + documents) / (1.0 + static_cast<double>(df))) + 1.0;
    out.push_back({gram, static_cast<double>(tf) * idf, ExtractionMethod::tfidf});
  }
  sort_terms(out);
  return out;
}

SalienceVerdict term_salience(std::string_view term, std::string_view doc,
                              const FrequencyTable& background, double critical) {
  if (background.total == 0) throw Error(ErrorCode::invalid_argument, "background frequency table is empty");
  const auto needle = normalize(term).words;
  const auto words = normalize(doc).words;
  const double a = static_cast<double>(count_occurrences(words, needle));
  if (a == 0.0) return {};
  const double c = static_cast<double>(words.size());
  const double b = static_cast<double>(background.count(join(needle, " ")));
  const double d = static_cast<double>(background.total);

  const double e1 = c * (a + b) / (c + d);
  const double e2 = d * (a + b) / (c + d);
  double g2 = a * std::log(a / e1);
  if (b > 0.0) g2 += b * std::log(b / e2);
  g2 = std::max(0.0, 2.0 * g2);
  return SalienceVerdict{g2 >= critical && a / c > b / d, g2};
}

std::vector<std::string> jargon_candidates(const NormalizedText& transcript,
                                           const EntrySet& glossary, const JargonOptions& options) {
  if (glossary.empty()) throw Error(ErrorCode::no_lexicon, "no lexicon: glossary is empty");
  const StopwordSet& stop = options.stopwords ? *options.stopwords : default_stopwords();
  // Joined words keep the transcript usable when it was built from bare tokens.
  const std::string text = transcript.original.empty() ? transcript.joined() : transcript.original;

  DocFrequencyTable derived;
  const DocFrequencyTable* docfreq = options.docfreq;
  if (docfreq == nullptr) {
    if (options.background != nullptr) {
      derived = DocFrequencyTable::from_background(*options.background);
    }
    docfreq = &derived;
  }

  std::vector<std::string> pool;
  auto take = [&](const std::vector<ScoredTerm>& terms) {
    for (std::size_t i = 0; i < terms.size() && i < options.top_k; ++i) {
      if (std::find(pool.begin(), pool.end(), terms[i].term) == pool.end()) pool.push_back(terms[i].term);
    }
  };
  take(rake_keywords(text, stop));
  take(yake_keywords(text, options.max_ngram, stop));
  take(tfidf_terms(text, *docfreq, options.max_ngram, stop));

  std::vector<std::string> out;
  for (const auto& candidate : pool) {
    if (options.background != nullptr &&
        !term_salience(candidate, text, *options.background, options.salience_critical).salient) {
      continue;
    }
    MatchResult term = best_match_normalized(candidate, glossary.entries(), options.threshold, options.edit_weight);
    if (!term.accepted) continue;
    if (!options.roster.empty()) {
      MatchResult name = best_match_normalized(candidate, options.roster, 0.0, options.edit_weight);
      if (name.score > term.score) continue;
    }
    if (std::find(out.begin(), out.end(), term.canonical) == out.end()) out.push_back(term.canonical);
  }
  return out;
}

namespace {

struct RawToken {
  std::string surface;     // punctuation stripped from both ends
  std::string normalized;  // normalize_joined(surface)
  bool capitalized = false;
  bool starts_sentence = false;
  bool ends_clause = false;
};

bool is_capitalized(std::string_view surface) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(surface.data(), static_cast<int32_t>(surface.size())));
  if (u.isEmpty() || !u_isupper(u.char32At(0))) return false;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    if (u_islower(c)) return true;
    i += U16_LENGTH(c);
  }
  return false;
}

bool is_edge_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) && c != '\''; }

std::vector<RawToken> raw_tokens(std::string_view text) {
  std::vector<RawToken> tokens;
  bool sentence_start = true;
  for (const auto& piece : split_whitespace(text)) {
    std::size_t b = 0, e = piece.size();
    while (b < e && is_edge_punct(static_cast<unsigned char>(piece[b]))) ++b;
    while (e > b && is_edge_punct(static_cast<unsigned char>(piece[e - 1]))) --e;
    std::string_view tail = std::string_view(piece).substr(e);
    bool ends_sentence = tail.find_first_of(".!?") != std::string_view::npos;
    bool ends_clause = ends_sentence || tail.find_first_of(",;:") != std::string_view::npos;

    RawToken tok;
    tok.surface = piece.substr(b, e - b);
    tok.normalized = normalize_joined(tok.surface);
    if (!tok.normalized.empty()) {
      tok.capitalized = is_capitalized(tok.surface);
      tok.starts_sentence = sentence_start;
      tok.ends_clause = ends_clause;
      tokens.push_back(std::move(tok));
      sentence_start = ends_sentence;
    } else if (ends_sentence) {
      sentence_start = true;
    } else if (ends_clause && !tokens.empty()) {
      tokens.back().ends_clause = true;
    }
  }
  return tokens;
}

}  // namespace

std::vector<NameHit> scan_names(std::string_view transcript, std::span<const Canonical> roster,
                                double threshold, double edit_weight) {
  const auto tokens = raw_tokens(transcript);
  const StopwordSet& stop = default_stopwords();
  struct Span {
    std::size_t begin, end;  // token range [begin, end)
    NameHit hit;
  };
  std::vector<Span> spans;
  std::vector<char> taken(tokens.size(), 0);

  auto match = [&](const std::string& normalized) {
    if (roster.empty()) return MatchResult{normalized, {}, 0.0, false};
    return best_match_normalized(normalized, roster, threshold, edit_weight);
  };

  for (std::size_t i = 0; i < tokens.size();) {
    if (!tokens[i].capitalized || tokens[i].starts_sentence) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < tokens.size() && !tokens[j].ends_clause && tokens[j + 1].capitalized &&
           !tokens[j + 1].starts_sentence) {
      ++j;
    }
    if (j - i + 1 <= 3) {
      std::vector<std::string> surface, normalized;
      for (std::size_t k = i; k <= j; ++k) {
        surface.push_back(tokens[k].surface);
        normalized.push_back(tokens[k].normalized);
        taken[k] = 1;
      }
      MatchResult m = match(join(normalized, " "));
      m.query = join(surface, " ");
      spans.push_back({i, j + 1, NameHit{join(surface, " "), std::move(m)}});
    }
    i = j + 1;
  }

  if (!roster.empty()) {
    struct Window {
      std::size_t begin, end;
      MatchResult match;
    };
    std::vector<Window> windows;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      std::vector<std::string> words;
      for (std::size_t n = 1; n <= 3 && i + n <= tokens.size(); ++n) {
        const RawToken& last = tokens[i + n - 1];
        if (taken[i + n - 1]) break;
        words.push_back(last.normalized);
        bool edges_ok = !stop.contains(words.front()) && !stop.contains(words.back());
        if (edges_ok) {
          MatchResult m = best_match_normalized(join(words, " "), roster, threshold, edit_weight);
          if (m.accepted) windows.push_back({i, i + n, std::move(m)});
        }
        if (last.ends_clause) break;
      }
    }
    std::stable_sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) {
      if (a.match.score != b.match.score) return a.match.score > b.match.score;
      if (a.end - a.begin != b.end - b.begin) return a.end - a.begin > b.end - b.begin;
      return a.begin < b.begin;
    });
    for (auto& w : windows) {
      bool free = std::none_of(taken.begin() + static_cast<std::ptrdiff_t>(w.begin),
                               taken.begin() + static_cast<std::ptrdiff_t>(w.end), [](char t) { return t != 0; });
      if (!free) continue;
      std::vector<std::string> surface;
      for (std::size_t k = w.begin; k < w.end; ++k) {
        surface.push_back(tokens[k].surface);
        taken[k] = 1;
      }
      w.match.query = join(surface, " ");
      spans.push_back({w.begin, w.end, NameHit{join(surface, " "), std::move(w.match)}});
    }
  }

  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::vector<NameHit> out;
  std::unordered_set<std::string> seen;
  for (auto& s : spans) {
    if (seen.insert(normalize_joined(s.hit.surface)).second) out.push_back(std::move(s.hit));
  }
  return out;
}

std::vector<std::string> person_candidates(std::string_view transcript,
                                           std::span<const Canonical> roster, double threshold,
                                           double edit_weight) {
  std::vector<std::string> out;
  for (auto& hit : scan_names(transcript, roster, threshold, edit_weight)) out.push_back(std::move(hit.surface));
  return out;
}

}  // namespace courtside
