#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "courtside/lexicon.hpp"
#include "courtside/textnorm.hpp"

namespace courtside {

enum class ExtractionMethod { rake, yake, tfidf };

const char* to_string(ExtractionMethod method) noexcept;

/// A candidate phrase (normalized) with a non-negative score, higher meaning
/// more salient for every method.
struct ScoredTerm {
  std::string term;
  double score = 0.0;
  ExtractionMethod method = ExtractionMethod::rake;

  bool operator==(const ScoredTerm&) const = default;
};

using StopwordSet = std::unordered_set<std::string>;

/// Built-in English list, used when no stopword file is configured.
const StopwordSet& default_stopwords();

/// One word per line, '#' comments. Entries are normalized.
StopwordSet load_stopwords(const std::filesystem::path& path);

/// Corpus unigram counts: text file of "word count" lines.
struct FrequencyTable {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;

  std::uint64_t count(const std::string& word) const;
  void add(const std::string& word, std::uint64_t n);

  static FrequencyTable load(const std::filesystem::path& path);
};

/// Document frequencies for TF-IDF. `documents` must be >= 1.
struct DocFrequencyTable {
  std::uint64_t documents = 1;
  std::unordered_map<std::string, std::uint64_t> df;

  std::uint64_t frequency(const std::string& term) const;

  /// Treats every background token as a one-word document, so the IDF
  /// degenerates to inverse unigram probability.
  static DocFrequencyTable from_background(const FrequencyTable& background);

  /// Each string is one document.
  static DocFrequencyTable from_documents(std::span<const std::string> documents);
};

/// RAKE: candidates are maximal stopword-free runs inside punctuation-delimited
/// fragments; a word scores degree/frequency over the co-occurrence graph and a
/// phrase sums its words. Sorted by score descending, ties lexicographic.
std::vector<ScoredTerm> rake_keywords(std::string_view text, const StopwordSet& stopwords);

/// Reduced YAKE over n-grams up to `max_ngram` that neither start nor end with
/// a stopword. Per word w, with S sentences:
///   position   P(w) = ln(3 + index of first sentence containing w)
///   frequency  F(w) = tf(w) / max tf
///   dispersion D(w) = sentences containing w / S
///   H(w) = P(w) / (F(w) + D(w))                       (lower is better)
/// A candidate k scores Y(k) = prod H / (tf(k) * (1 + sum H)) over its
/// non-stopword words, and is reported as 1 / (1 + Y(k)).
std::vector<ScoredTerm> yake_keywords(std::string_view text, std::size_t max_ngram,
                                      const StopwordSet& stopwords = default_stopwords());

/// score = tf * (ln((1 + documents) / (1 + df)) + 1) for every n-gram up to
/// `max_ngram` not starting or ending with a stopword. Multi-word df is bounded
/// by the smallest df of its words.
std::vector<ScoredTerm> tfidf_terms(std::string_view doc, const DocFrequencyTable& corpus,
                                    std::size_t max_ngram = 3,
                                    const StopwordSet& stopwords = default_stopwords());

struct SalienceVerdict {
  bool salient = false;
  double g2 = 0.0;
};

/// Dunning log-likelihood of the term's rate in `doc` against the background.
/// Salient iff G2 >= critical and the term is over-represented in the doc.
SalienceVerdict term_salience(std::string_view term, std::string_view doc,
                              const FrequencyTable& background, double critical = 3.84);

struct JargonOptions {
  double threshold = 0.90;
  double edit_weight = 0.5;
  std::size_t top_k = 10;
  std::size_t max_ngram = 3;
  double salience_critical = 3.84;
  const StopwordSet* stopwords = nullptr;       // default_stopwords() when null
  const FrequencyTable* background = nullptr;   // salience filter skipped when null
  const DocFrequencyTable* docfreq = nullptr;   // derived from background when null
  std::span<const Canonical> roster;            // candidates closer to a name are dropped
};

/// Union of the top-K terms from RAKE, YAKE and TF-IDF, mapped onto the
/// glossary by fuzzy match. Returns glossary display forms, deduplicated, in
/// discovery order.
std::vector<std::string> jargon_candidates(const NormalizedText& transcript,
                                           const EntrySet& glossary, const JargonOptions& options);

/// Surface spellings that may be person names: runs of 1-3 capitalized tokens
/// that do not start a sentence, plus token n-grams whose best roster match
/// reaches `threshold`. Deduplicated, in transcript order.
std::vector<std::string> person_candidates(std::string_view transcript,
                                           std::span<const Canonical> roster, double threshold,
                                           double edit_weight = 0.5);

/// A located name candidate with its best roster match.
struct NameHit {
  std::string surface;
  MatchResult match;
};

/// person_candidates() with the roster match attached to each candidate.
std::vector<NameHit> scan_names(std::string_view transcript, std::span<const Canonical> roster,
                                double threshold, double edit_weight = 0.5);

}  // namespace courtside
