#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

/// A canonical lexicon entry as seen by the matcher. `variants` are the
/// normalized spellings a query is compared against; the first is always
/// `normalized`.
struct Canonical {
  std::string display;
  std::string normalized;
  std::vector<std::string> variants;
};

enum class MatchMode {
  phrase,  // whole normalized string only
  name,    // also swapped two-token order and bare surname
};

/// Spellings used for fuzzy name lookup: the full form, the two tokens
/// swapped for two-token names, and the surname (ignoring generational
/// suffixes such as "jr" or "iii") for multi-token names.
std::vector<std::string> name_variants(std::string_view normalized);

struct MatchResult {
  std::string query;
  std::string canonical;  // display form
  double score = 0.0;
  bool accepted = false;
};

/// Byte-level edit distances. All three use unit costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Unrestricted Damerau-Levenshtein (adjacent transpositions allowed between
/// any edits). A metric on strings and never larger than levenshtein().
std::size_t damerau_levenshtein(std::string_view a, std::string_view b);

/// Restricted Damerau variant (optimal string alignment): no substring is
/// edited after being transposed. Not a metric.
std::size_t osa_distance(std::string_view a, std::string_view b);

/// Jaro similarity with the Winkler common-prefix boost (prefix <= 4, p = 0.1).
double jaro_winkler(std::string_view a, std::string_view b);

/// 1 - levenshtein / max length, with two empty strings scoring 1.
double edit_similarity(std::string_view a, std::string_view b);

/// Weighted mean of edit_similarity and jaro_winkler over already-normalized
/// inputs.
double combined_similarity_normalized(std::string_view a, std::string_view b,
                                      double edit_weight = 0.5);

/// Same, normalizing both sides first.
double combined_similarity(std::string_view a, std::string_view b, double edit_weight = 0.5);

/// Best score of a normalized query against every variant of an entry.
double entry_similarity(std::string_view normalized_query, const Canonical& entry,
                        double edit_weight = 0.5);

/// Highest-scoring entry. Ties go to the shorter display form, then to the
/// lexicographically smaller one. Throws Error(no_lexicon) on an empty set.
MatchResult best_match(std::string_view query, std::span<const Canonical> entries,
                       double threshold, double edit_weight = 0.5);

/// best_match() for a query that is already normalized.
MatchResult best_match_normalized(std::string_view normalized_query,
                                  std::span<const Canonical> entries, double threshold,
                                  double edit_weight = 0.5);

}  // namespace courtside
