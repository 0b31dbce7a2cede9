#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "courtside/lexicon.hpp"

namespace courtside {

/// Speech recognizer with an initial-prompt channel.
class AsrBackend {
 public:
  virtual ~AsrBackend() = default;

  /// Throws Error(transport) when the service cannot be reached and
  /// Error(asr) when it answers with a failure.
  virtual std::string transcribe(const std::string& audio_ref, const std::optional<std::string>& initial_prompt) = 0;
};

/// Parameters of the mock recognizer. Each rate is the probability that one
/// site of that kind is corrupted:
///   name_sub     a roster name (full, or a capitalized surname)
///   jargon       a glossary phrase
///   accent       any other word of six or more letters that is not a stopword
///   segmentation a sentence end, whose last word is dropped
/// A corruption whose truth words occur in the prompt is undone with
/// probability prompt_rescue_prob. Independently, each roster name in the
/// prompt that the truth does not contain overwrites the most similar output
/// span (similarity >= 0.5) with probability prompt_hallucination_prob.
struct CorruptionModel {
  double name_sub_rate = 0.35;
  double jargon_corrupt_rate = 0.28;
  double accent_rate = 0.22;
  double segmentation_rate = 0.15;
  double prompt_rescue_prob = 0.9;
  double prompt_hallucination_prob = 0.3;
  std::uint64_t rng_seed = 0;

  /// Throws Error(invalid_argument) unless every probability is in [0, 1].
  void validate() const;
};

/// Phonetic respelling of one lowercase word; `choice` in [0, 1) picks among
/// the applicable rewrites. Long words are split into two syllable groups.
std::string mangle_name_word(std::string_view word, double choice);

/// Precomputed lexicon lookups for the mock.
class MockLexiconIndex {
 public:
  explicit MockLexiconIndex(const Lexicon& lexicon);

  const Lexicon& lexicon() const { return lexicon_; }
  std::size_t longest_entry_words() const { return longest_; }
  bool is_full_name(const std::string& normalized) const { return names_.contains(normalized); }
  bool is_surname(const std::string& normalized) const { return surnames_.contains(normalized); }
  bool is_jargon(const std::string& normalized) const { return jargon_.contains(normalized); }

 private:
  const Lexicon& lexicon_;
  std::unordered_map<std::string, const Canonical*> names_;
  std::unordered_map<std::string, int> surnames_;
  std::unordered_map<std::string, const Canonical*> jargon_;
  std::size_t longest_ = 1;
};

/// Deterministic simulated transcription of `truth`. `stream` selects the
/// random stream (the backend passes the audio locator), so the same inputs
/// always give the same output.
std::string mock_transcribe(const CorruptionModel& model, std::string_view truth, const MockLexiconIndex& index,
                            const std::optional<std::string>& initial_prompt, std::string_view stream = {});

std::string mock_transcribe(const CorruptionModel& model, std::string_view truth, const Lexicon& lexicon,
                            const std::optional<std::string>& initial_prompt, std::string_view stream = {});

/// Mock backend. Audio locators resolve to truth text through `truths` first
/// and otherwise name a file holding the truth transcript.
class MockAsrBackend final : public AsrBackend {
 public:
  MockAsrBackend(CorruptionModel model, const Lexicon& lexicon, std::map<std::string, std::string> truths = {});

  std::string transcribe(const std::string& audio_ref, const std::optional<std::string>& initial_prompt) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t prompted_calls() const { return prompted_calls_.load(); }

 private:
  CorruptionModel model_;
  MockLexiconIndex index_;
  std::map<std::string, std::string> truths_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> prompted_calls_{0};
};

struct HttpAsrOptions {
  std::string endpoint = "http://127.0.0.1:9000/transcribe";
  std::string model;  // sent when non-empty
  double timeout_seconds = 300.0;
  int max_retries = 2;
  double backoff_seconds = 1.0;
};

/// Posts multipart/form-data with the audio file as `audio`, plus
/// `initial_prompt` and `model` when set; expects JSON {"text": ...}. The text
/// is returned byte for byte.
std::unique_ptr<AsrBackend> make_http_asr_backend(const HttpAsrOptions& options);

}  // namespace courtside
