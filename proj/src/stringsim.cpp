#include "courtside/stringsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"

namespace courtside {

namespace {

bool is_generational_suffix(std::string_view token) {
  return token == "jr" || token == "sr" || token == "ii" || token == "iii" || token == "iv";
}

}  // namespace

std::vector<std::string> name_variants(std::string_view normalized) {
  std::vector<std::string> variants{std::string(normalized)};
  auto add = [&](std::string v) {
    if (std::find(variants.begin(), variants.end(), v) == variants.end()) {
      variants.push_back(std::move(v));
    }
  };
  auto tokens = split_whitespace(normalized);
  while (tokens.size() > 1 && is_generational_suffix(tokens.back())) tokens.pop_back();

  if (tokens.size() == 2) add(tokens[1] + " " + tokens[0]);
  if (tokens.size() >= 2) add(tokens.back());
  return variants;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t osa_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      at(i, j) = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        at(i, j) = std::min(at(i, j), at(i - 2, j - 2) + 1);
      }
    }
  }
  return at(n, m);
}

// Lowrance-Wagner with unit costs.
std::size_t damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t inf = n + m;
  std::array<std::size_t, 256> last_row{};  // last row (1-based) where each byte occurred in a
  std::vector<std::size_t> d((n + 2) * (m + 2));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 2) + j]; };

  at(0, 0) = inf;
  for (std::size_t i = 0; i <= n; ++i) {
    at(i + 1, 0) = inf;
    at(i + 1, 1) = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    at(0, j + 1) = inf;
    at(1, j + 1) = j;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t k = last_row[static_cast<unsigned char>(b[j - 1])];
      std::size_t l = last_match_col;
      std::size_t cost = 1;
      if (a[i - 1] == b[j - 1]) {
        cost = 0;
        last_match_col = j;
      }
      at(i + 1, j + 1) = std::min({at(i, j) + cost, at(i + 1, j) + 1, at(i, j + 1) + 1,
                                   at(k, l) + (i - k - 1) + 1 + (j - l - 1)});
    }
    last_row[static_cast<unsigned char>(a[i - 1])] = i;
  }
  return at(n + 1, m + 1);
}

double jaro_winkler(std::string_view a, std::string_view b) {
  if (a == b) return 1.0;
  if (a.empty() || b.empty()) return 0.0;

  const std::size_t window =
      std::max<std::size_t>(std::max(a.size(), b.size()) / 2, 1) - 1;
  std::vector<char> a_matched(a.size(), 0), b_matched(b.size(), 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t lo = i > window ? i - window : 0;
    std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_matched[j] && a[i] == b[j]) {
        a_matched[i] = b_matched[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, k = 0; i < a.size(); ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[k]) ++k;
    if (a[i] != b[k]) ++half_transpositions;
    ++k;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  const double jaro = (m / a.size() + m / b.size() + (m - t) / m) / 3.0;

  std::size_t prefix = 0;
  while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

double edit_similarity(std::string_view a, std::string_view b) {
  std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double combined_similarity_normalized(std::string_view a, std::string_view b,
                                      double edit_weight) {
  if (a == b) return 1.0;
  double score = edit_weight * edit_similarity(a, b) + (1.0 - edit_weight) * jaro_winkler(a, b);
  // Distinct strings must never reach exactly 1.
  return std::min(score, std::nextafter(1.0, 0.0));
}

double combined_similarity(std::string_view a, std::string_view b, double edit_weight) {
  return combined_similarity_normalized(normalize_joined(a), normalize_joined(b), edit_weight);
}

double entry_similarity(std::string_view normalized_query, const Canonical& entry,
                        double edit_weight) {
  double best = combined_similarity_normalized(normalized_query, entry.normalized, edit_weight);
  for (const auto& variant : entry.variants) {
    if (best >= 1.0) break;
    best = std::max(best, combined_similarity_normalized(normalized_query, variant, edit_weight));
  }
  return best;
}

MatchResult best_match_normalized(std::string_view normalized_query,
                                  std::span<const Canonical> entries, double threshold,
                                  double edit_weight) {
  if (entries.empty()) throw Error(ErrorCode::no_lexicon, "no lexicon: cannot match against an empty entry set");
  if (threshold < 0.0 || threshold > 1.0) {
    throw Error(ErrorCode::invalid_argument, "match threshold must lie in [0,1]");
  }
  const Canonical* winner = nullptr;
  double winner_score = -1.0;
  for (const auto& entry : entries) {
    double score = entry_similarity(normalized_query, entry, edit_weight);
    bool better = score > winner_score;
    if (!better && score == winner_score) {
      better = entry.display.size() < winner->display.size() ||
               (entry.display.size() == winner->display.size() && entry.display < winner->display);
    }
    if (better) {
      winner = &entry;
      winner_score = score;
    }
  }
  return MatchResult{std::string(normalized_query), winner->display, winner_score,
                     winner_score >= threshold};
}

MatchResult best_match(std::string_view query, std::span<const Canonical> entries,
                       double threshold, double edit_weight) {
  MatchResult result = best_match_normalized(normalize_joined(query), entries, threshold, edit_weight);
  result.query = std::string(query);
  return result;
}

}  // namespace courtside
