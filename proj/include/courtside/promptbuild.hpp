#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace courtside {

/// Counts tokens the way the consuming ASR model would.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::size_t count(std::string_view text) const = 0;

  /// Longest suffix of `text`, cut on a token boundary, that holds at most
  /// `max_tokens` tokens.
  virtual std::string tail(std::string_view text, std::size_t max_tokens) const = 0;
};

/// ceil(1.5 * whitespace words). Overestimates English subword counts.
class HeuristicTokenizer final : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override;
  std::string tail(std::string_view text, std::size_t max_tokens) const override;
};

/// Byte-level BPE in the GPT-2 family, loaded from vocab.json + merges.txt.
class BpeTokenizer final : public Tokenizer {
 public:
  static BpeTokenizer load(const std::filesystem::path& vocab_json, const std::filesystem::path& merges_txt);

  /// Token strings in the byte-to-unicode alphabet of the vocabulary.
  std::vector<std::string> encode(std::string_view text) const;

  std::size_t count(std::string_view text) const override;
  std::string tail(std::string_view text, std::size_t max_tokens) const override;

 private:
  // Raw byte pieces; concatenating them reproduces the input.
  std::vector<std::string> pieces(std::string_view text) const;
  std::vector<std::string> bpe(const std::string& word) const;

  std::unordered_map<std::string, int> vocab_;
  std::unordered_map<std::string, int> ranks_;  // "left right" -> merge priority
};

inline constexpr std::size_t kWhisperPromptWindow = 224;

struct TokenBudget {
  std::size_t hard_limit = kWhisperPromptWindow;
  std::size_t target_limit = 20;
  std::shared_ptr<const Tokenizer> tokenizer;  // null means heuristic

  /// Throws Error(invalid_argument) unless 0 < target_limit <= hard_limit == 224.
  void validate() const;
};

std::size_t count_tokens(std::string_view text, const TokenBudget& budget);

/// Keeps only the trailing tokens that fit the hard limit, as the ASR decoder
/// would. Text within the limit is returned unchanged.
std::string truncate_to_window(std::string_view prompt, const TokenBudget& budget);

struct ContextPrompt {
  std::string text;
  std::size_t token_count = 0;
  std::string topic;
  std::vector<std::string> names;
  std::vector<std::string> jargon;

  bool operator==(const ContextPrompt&) const = default;
};

using SentenceBuilder = std::function<std::string(
    const std::string& topic, std::span<const std::string> names, std::span<const std::string> jargon)>;

/// "A", "A and B", "A, B and C".
std::string join_list(std::span<const std::string> items);

/// "<topic> featuring <names> with <jargon>." with empty parts left out.
std::string template_sentence(const std::string& topic, std::span<const std::string> names,
                              std::span<const std::string> jargon);

/// Builds the second-pass prompt. `jargon` is ordered most salient first and is
/// trimmed from the back, then names beyond the first two, until the sentence
/// fits the target. If the result still exceeds the hard limit the remaining
/// names go too, and the window cut is applied last. A builder that throws is
/// replaced by template_sentence. Never fails for a non-empty topic.
ContextPrompt build_prompt(const std::string& topic, std::vector<std::string> names,
                           std::vector<std::string> jargon, const TokenBudget& budget,
                           const SentenceBuilder& builder = template_sentence);

}  // namespace courtside
