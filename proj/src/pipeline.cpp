#include <algorithm>
#include <atomic>
#include <mutex>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "courtside/error.hpp"
#include "courtside/pipeline.hpp"
#include "courtside/stringsim.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

namespace {

constexpr const char* kVariantNames[] = {"baseline", "p1", "p2", "p3", "p4"};
constexpr const char* kReasonNames[] = {"length_safeguard", "decider_no", "agent_failure", "out_of_domain"};

const char* verdict_label(const DeciderOutcome& d) {
  if (d.failed) return "FAILED";
  return d.verdict.yes ? "YES" : "NO";
}

}  // namespace

const char* to_string(Variant variant) noexcept { return kVariantNames[static_cast<int>(variant)]; }

Variant variant_from_string(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kVariantNames[i]) return static_cast<Variant>(i);
  }
  throw Error(ErrorCode::invalid_argument, "unknown variant '" + std::string(name) + "' (expected baseline, p1, p2, p3 or p4)");
}

const char* to_string(FallbackReason reason) noexcept { return kReasonNames[static_cast<int>(reason)]; }

FallbackReason fallback_reason_from_string(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kReasonNames[i]) return static_cast<FallbackReason>(i);
  }
  throw Error(ErrorCode::parse, "unknown fallback reason '" + std::string(name) + "'");
}

bool length_safeguard(std::string_view baseline, std::string_view enhanced, double ratio) {
  const double base = double(normalize(baseline).words.size());
  const double enh = double(normalize(enhanced).words.size());
  if (base == 0.0) return true;
  return enh >= ratio * base - 1e-9;
}

Pipeline::Pipeline(AsrBackend& backend, ChatClient* client, const Lexicon& lexicon, PipelineConfig config)
    : backend_(backend), client_(client), lexicon_(lexicon), config_(std::move(config)) {}

ChatClient& Pipeline::client() const {
  if (!client_) throw Error(ErrorCode::config, "this variant needs a chat client");
  return *client_;
}

SegmentResult Pipeline::run(Variant variant, const Segment& segment) const {
  SegmentResult r;
  r.segment_id = segment.segment_id;
  r.variant = variant;
  try {
    r.baseline_transcript = backend_.transcribe(segment.audio_ref, std::nullopt);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    spdlog::warn("segment {}: first pass failed: {}", segment.segment_id, e.what());
    return r;
  }
  r.enhanced_transcript = r.baseline_transcript;
  if (variant == Variant::baseline) return r;

  try {
    switch (variant) {
      case Variant::p1: run_p1(r, segment.audio_ref); break;
      case Variant::p2: run_p2(r); break;
      case Variant::p3: run_p3(r, segment.audio_ref); break;
      case Variant::p4: run_p4(r, segment.audio_ref); break;
      case Variant::baseline: break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    spdlog::warn("segment {}: agent stage failed: {}", segment.segment_id, e.what());
    r.prompt_used.reset();
    r.enhanced_transcript = r.baseline_transcript;
    r.accepted = false;
    r.fallback_reason = FallbackReason::agent_failure;
  }
  return r;
}

void Pipeline::second_pass(SegmentResult& r, const std::string& audio, ContextPrompt prompt) const {
  r.prompt_used = std::move(prompt);
  std::string enhanced;
  try {
    enhanced = backend_.transcribe(audio, r.prompt_used->text);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    spdlog::warn("segment {}: second pass failed: {}", r.segment_id, e.what());
    return;
  }
  r.second_pass_transcript = enhanced;
  if (length_safeguard(r.baseline_transcript, enhanced, config_.safeguard_ratio)) {
    r.enhanced_transcript = std::move(enhanced);
    r.accepted = true;
  } else {
    r.fallback_reason = FallbackReason::length_safeguard;
  }
}

void Pipeline::run_p1(SegmentResult& r, const std::string& audio) const {
  auto topic = topic_agent(client(), r.baseline_transcript, config_.agents);
  r.topic = topic.topic;
  if (topic.fallback) {
    r.fallback_reason = FallbackReason::agent_failure;
    return;
  }
  ContextPrompt prompt;
  prompt.topic = topic.topic;
  prompt.text = truncate_to_window(topic.topic, config_.agents.budget);
  prompt.token_count = count_tokens(prompt.text, config_.agents.budget);
  second_pass(r, audio, std::move(prompt));
}

void Pipeline::run_p2(SegmentResult& r) const {
  std::string edited = fix_agent(client(), r.baseline_transcript, config_.agents);
  r.second_pass_transcript = edited;
  if (length_safeguard(r.baseline_transcript, edited, config_.safeguard_ratio)) {
    r.enhanced_transcript = std::move(edited);
    r.accepted = true;
  } else {
    r.fallback_reason = FallbackReason::length_safeguard;
  }
}

void Pipeline::run_p3(SegmentResult& r, const std::string& audio) const {
  auto topic = topic_agent(client(), r.baseline_transcript, config_.agents);
  r.topic = topic.topic;
  if (topic.fallback) {
    r.fallback_reason = FallbackReason::agent_failure;
    return;
  }
  auto names = ner_agent(client(), r.baseline_transcript, topic.topic, lexicon_.names, config_.agents);
  ContextPrompt prompt;
  prompt.topic = topic.topic;
  prompt.names = names;
  std::string text = names.empty() ? topic.topic : topic.topic + ": " + join(names, ", ");
  prompt.text = truncate_to_window(text, config_.agents.budget);
  prompt.token_count = count_tokens(prompt.text, config_.agents.budget);
  second_pass(r, audio, std::move(prompt));
}

void Pipeline::run_p4(SegmentResult& r, const std::string& audio) const {
  const auto& settings = config_.agents;
  auto topic = topic_agent(client(), r.baseline_transcript, settings);
  r.topic = topic.topic;
  if (topic.fallback) {
    r.fallback_reason = FallbackReason::agent_failure;
    return;
  }
  if (!lexicon_.domain_label.empty() &&
      combined_similarity(topic.topic, lexicon_.domain_label) < config_.out_of_domain_threshold) {
    r.fallback_reason = FallbackReason::out_of_domain;
    return;
  }

  std::vector<std::string> names;
  auto ner = ner_decider(client(), r.baseline_transcript, lexicon_.names, settings);
  r.ner_verdict = verdict_label(ner);
  if (ner.proceed()) names = best_candidates(client(), r.baseline_transcript, lexicon_.names, settings);

  auto jargon = jargon_agent(client(), r.baseline_transcript, topic.topic, lexicon_, settings);
  auto jd = jargon_decider(client(), r.baseline_transcript, topic.topic, jargon, settings);
  r.jargon_verdict = verdict_label(jd);
  if (!jd.proceed()) jargon.clear();

  if (names.empty() && jargon.empty()) {
    r.fallback_reason = FallbackReason::decider_no;
    return;
  }

  SentenceBuilder builder = [&](const std::string& t, std::span<const std::string> n, std::span<const std::string> j) {
    return sentence_builder(client(), t, n, j, settings);
  };
  second_pass(r, audio, build_prompt(topic.topic, std::move(names), std::move(jargon), settings.budget, builder));
}

std::vector<SegmentResult> run_corpus(const Pipeline& pipeline, Variant variant, const std::vector<Segment>& segments,
                                      std::size_t workers, const ProgressFn& progress) {
  std::vector<SegmentResult> results(segments.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < segments.size(); i = next++) {
      try {
        results[i] = pipeline.run(variant, segments[i]);
      } catch (const std::exception& e) {
        // Only configuration problems escape Pipeline::run; record them per
        // segment so the run still completes.
        results[i] = SegmentResult{};
        results[i].segment_id = segments[i].segment_id;
        results[i].variant = variant;
        results[i].failed = true;
        results[i].error = e.what();
      }
      std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(results[i], finished, segments.size());
      }
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, segments.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return results;
}

namespace {

using OJson = nlohmann::ordered_json;

OJson optional_string(const std::optional<std::string>& s) { return s ? OJson(*s) : OJson(nullptr); }

OJson to_json(const SegmentResult& r) {
  OJson j;
  j["type"] = "segment";
  j["segment_id"] = r.segment_id;
  j["variant"] = to_string(r.variant);
  j["failed"] = r.failed;
  j["error"] = r.error;
  j["baseline_transcript"] = r.baseline_transcript;
  if (r.prompt_used) {
    const auto& p = *r.prompt_used;
    j["prompt_used"] = OJson{{"text", p.text}, {"token_count", p.token_count}, {"topic", p.topic},
                             {"names", p.names}, {"jargon", p.jargon}};
  } else {
    j["prompt_used"] = nullptr;
  }
  j["second_pass_transcript"] = optional_string(r.second_pass_transcript);
  j["enhanced_transcript"] = r.enhanced_transcript;
  j["accepted"] = r.accepted;
  j["fallback_reason"] = r.fallback_reason ? OJson(to_string(*r.fallback_reason)) : OJson(nullptr);
  j["topic"] = r.topic;
  j["ner_verdict"] = optional_string(r.ner_verdict);
  j["jargon_verdict"] = optional_string(r.jargon_verdict);
  return j;
}

std::optional<std::string> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

SegmentResult from_json(const nlohmann::json& j) {
  SegmentResult r;
  r.segment_id = j.at("segment_id").get<std::string>();
  r.variant = variant_from_string(j.at("variant").get<std::string>());
  r.failed = j.at("failed").get<bool>();
  r.error = j.value("error", std::string());
  r.baseline_transcript = j.at("baseline_transcript").get<std::string>();
  if (const auto& p = j.at("prompt_used"); !p.is_null()) {
    ContextPrompt prompt;
    prompt.text = p.at("text").get<std::string>();
    prompt.token_count = p.at("token_count").get<std::size_t>();
    prompt.topic = p.at("topic").get<std::string>();
    prompt.names = p.at("names").get<std::vector<std::string>>();
    prompt.jargon = p.at("jargon").get<std::vector<std::string>>();
    r.prompt_used = std::move(prompt);
  }
  r.second_pass_transcript = read_optional(j, "second_pass_transcript");
  r.enhanced_transcript = j.at("enhanced_transcript").get<std::string>();
  r.accepted = j.at("accepted").get<bool>();
  if (auto reason = read_optional(j, "fallback_reason")) r.fallback_reason = fallback_reason_from_string(*reason);
  r.topic = j.value("topic", std::string());
  r.ner_verdict = read_optional(j, "ner_verdict");
  r.jargon_verdict = read_optional(j, "jargon_verdict");
  if (!r.accepted && r.enhanced_transcript != r.baseline_transcript) {
    throw Error(ErrorCode::parse, "segment " + r.segment_id + " is not accepted but reports an enhanced transcript");
  }
  return r;
}

}  // namespace

std::string render_run_artifact(const RunArtifact& artifact) {
  std::size_t failed = 0, accepted = 0;
  for (const auto& r : artifact.results) {
    failed += r.failed;
    accepted += r.accepted;
  }
  OJson header{{"type", "run"},
               {"variant", to_string(artifact.variant)},
               {"segments", artifact.results.size()},
               {"failed", failed},
               {"accepted", accepted}};
  std::string out = header.dump() + "\n";
  for (const auto& r : artifact.results) out += to_json(r).dump() + "\n";
  return out;
}

void write_run_artifact(const RunArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write run artifact " + path.string());
  out << render_run_artifact(artifact);
  if (!out) throw Error(ErrorCode::io, "failed writing run artifact " + path.string());
}

RunArtifact parse_run_artifact(std::string_view text) {
  RunArtifact artifact;
  bool have_header = false;
  std::size_t expected = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "run") {
        if (have_header) throw Error(ErrorCode::parse, "second run header");
        artifact.variant = variant_from_string(j.at("variant").get<std::string>());
        expected = j.at("segments").get<std::size_t>();
        have_header = true;
      } else if (type == "segment") {
        if (!have_header) throw Error(ErrorCode::parse, "segment record before the run header");
        artifact.results.push_back(from_json(j));
      } else {
        throw Error(ErrorCode::parse, "unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, "run artifact line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, "run artifact line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  // A blank file is an empty run.
  if (!have_header) return artifact;
  if (artifact.results.size() != expected) {
    throw Error(ErrorCode::parse, "run artifact header announces " + std::to_string(expected) + " segments, found " +
                                      std::to_string(artifact.results.size()));
  }
  return artifact;
}

RunArtifact read_run_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read run artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_artifact(ss.str());
}

}  // namespace courtside
