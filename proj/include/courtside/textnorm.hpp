#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

/// Lowercase ASCII word tokens of a transcript, plus the text they came from.
/// Every word matches [a-z0-9]+.
struct NormalizedText {
  std::vector<std::string> words;
  std::string original;

  /// Words joined by single spaces. normalize(joined()) yields the same words.
  std::string joined() const;
};

/// Evaluation normalization:
///   * compatibility decomposition (NFKD), combining marks dropped
///   * lowercase
///   * apostrophes deleted ("it's" -> "its")
///   * hyphens deleted, joining the halves ("one-point" -> "onepoint")
///   * any other non-alphanumeric character is a word boundary
///   * digit runs are kept verbatim as tokens
NormalizedText normalize(std::string_view text);

/// Shorthand for normalize(text).joined().
std::string normalize_joined(std::string_view text);

/// The word sequence; its length is the N of a WER computation.
std::span<const std::string> tokenize_words(const NormalizedText& text) noexcept;

/// Splits on ASCII whitespace without any other processing.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(std::span<const std::string> words, std::string_view sep);

std::string trim(std::string_view text);

}  // namespace courtside
