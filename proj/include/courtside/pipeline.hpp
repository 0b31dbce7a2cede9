#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/agents.hpp"
#include "courtside/asr.hpp"
#include "courtside/manifest.hpp"
#include "courtside/promptbuild.hpp"

namespace courtside {

enum class Variant { baseline, p1, p2, p3, p4 };

const char* to_string(Variant variant) noexcept;
/// Throws Error(invalid_argument) for unknown names.
Variant variant_from_string(std::string_view name);

enum class FallbackReason { length_safeguard, decider_no, agent_failure, out_of_domain };

const char* to_string(FallbackReason reason) noexcept;
FallbackReason fallback_reason_from_string(std::string_view name);

/// Outcome for one segment. `enhanced_transcript` is the transcript that gets
/// reported and scored; it equals the baseline whenever `accepted` is false.
struct SegmentResult {
  std::string segment_id;
  Variant variant = Variant::baseline;
  std::string baseline_transcript;
  std::optional<ContextPrompt> prompt_used;
  std::string enhanced_transcript;
  bool accepted = false;
  std::optional<FallbackReason> fallback_reason;

  // A backend error; the segment is excluded from scoring.
  bool failed = false;
  std::string error;

  // Audit trail.
  std::string topic;
  std::optional<std::string> ner_verdict;     // YES, NO or FAILED
  std::optional<std::string> jargon_verdict;
  std::optional<std::string> second_pass_transcript;  // before the safeguard

  bool operator==(const SegmentResult&) const = default;
};

struct PipelineConfig {
  AgentSettings agents;
  double safeguard_ratio = 0.80;
  double out_of_domain_threshold = 0.60;
};

/// Word-count check on normalized text: accept iff
/// words(enhanced) >= ratio * words(baseline). An empty baseline accepts.
bool length_safeguard(std::string_view baseline, std::string_view enhanced, double ratio = 0.80);

/// Runs one variant over one segment. Agent failures fall back to the
/// baseline; backend failures mark the result failed. Never throws for a
/// segment-level problem.
class Pipeline {
 public:
  /// `client` may be null when only the baseline variant is run.
  Pipeline(AsrBackend& backend, ChatClient* client, const Lexicon& lexicon, PipelineConfig config = {});

  SegmentResult run(Variant variant, const Segment& segment) const;

  const PipelineConfig& config() const { return config_; }

 private:
  void run_p1(SegmentResult& r, const std::string& audio) const;
  void run_p2(SegmentResult& r) const;
  void run_p3(SegmentResult& r, const std::string& audio) const;
  void run_p4(SegmentResult& r, const std::string& audio) const;
  void second_pass(SegmentResult& r, const std::string& audio, ContextPrompt prompt) const;
  ChatClient& client() const;

  AsrBackend& backend_;
  ChatClient* client_;
  const Lexicon& lexicon_;
  PipelineConfig config_;
};

using ProgressFn = std::function<void(const SegmentResult& result, std::size_t done, std::size_t total)>;

/// Processes every segment with up to `workers` threads. The result list
/// follows manifest order whatever the completion order.
std::vector<SegmentResult> run_corpus(const Pipeline& pipeline, Variant variant, const std::vector<Segment>& segments,
                                      std::size_t workers = 1, const ProgressFn& progress = {});

struct RunArtifact {
  Variant variant = Variant::baseline;
  std::vector<SegmentResult> results;

  bool operator==(const RunArtifact&) const = default;
};

/// JSON lines: a {"type":"run"} header followed by one {"type":"segment"}
/// record per result. Contains no timestamps, so identical runs give identical
/// bytes.
void write_run_artifact(const RunArtifact& artifact, const std::filesystem::path& path);
std::string render_run_artifact(const RunArtifact& artifact);

/// Throws Error(parse) on malformed input and Error(io) if unreadable. A
/// blank file reads as an empty run.
RunArtifact read_run_artifact(const std::filesystem::path& path);
RunArtifact parse_run_artifact(std::string_view text);

}  // namespace courtside
