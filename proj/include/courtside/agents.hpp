#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/chat.hpp"
#include "courtside/extraction.hpp"
#include "courtside/lexicon.hpp"
#include "courtside/promptbuild.hpp"

namespace courtside {

enum class AgentKind { topic, ner, jargon, ner_decider, jargon_decider, best_candidates, sentence_builder, fix };

const char* to_string(AgentKind kind) noexcept;

/// Parses the names used by to_string. Throws Error(invalid_argument).
AgentKind agent_kind_from_string(std::string_view name);

/// Built-in system instructions, without few-shot material.
const std::string& base_instructions(AgentKind kind);

/// Which agent a system prompt was built for, by its instruction prefix.
std::optional<AgentKind> agent_for_system(std::string_view system);

struct AgentSettings {
  double match_threshold = 0.75;    // loose fuzzy match
  double replace_threshold = 0.85;  // confident enough to substitute a roster name
  double jargon_threshold = 0.90;
  int max_retries = 2;
  DecodeParams decode;
  std::string fallback_topic = "sports commentary";
  std::map<AgentKind, std::string> few_shot;
  TokenBudget budget;

  /// base_instructions plus the configured few-shot block, if any.
  std::string system_prompt(AgentKind kind) const;
};

struct DeciderVerdict {
  bool yes = false;
  std::string reason;

  bool operator==(const DeciderVerdict&) const = default;
};

/// Strict parse of {"Answer": "YES"|"NO", "Reason": "..."}; a surrounding
/// code fence is tolerated. Throws Error(parse) on anything else.
DeciderVerdict parse_verdict(std::string_view raw);

/// A transcript span that the deterministic shadow check thinks is a
/// misspelled roster name (0.5 <= score < 1).
struct ShadowFlag {
  std::string surface;
  std::string canonical;
  double score = 0.0;
};

struct DeciderOutcome {
  DeciderVerdict verdict;
  bool failed = false;  // client error or unparseable output after retries
  std::string error;
  std::vector<ShadowFlag> shadow;

  /// Failures count as NO.
  bool proceed() const { return !failed && verdict.yes; }
};

struct TopicResult {
  std::string topic;
  bool fallback = false;
};

/// 2-5 word topic, else the configured fallback topic.
TopicResult topic_agent(ChatClient& client, std::string_view transcript, const AgentSettings& settings);

/// Names from the agent, each kept only if it matches the roster at the
/// replace threshold, or occurs verbatim in the transcript and matches at the
/// match threshold. Returned as roster display strings in first-appearance
/// order.
std::vector<std::string> ner_agent(ChatClient& client, std::string_view transcript, std::string_view topic,
                                   const EntrySet& roster, const AgentSettings& settings);

/// Glossary display strings for terms matching at the jargon threshold, minus
/// anything that matches a roster name at the replace threshold.
std::vector<std::string> jargon_agent(ChatClient& client, std::string_view transcript, std::string_view topic,
                                      const Lexicon& lexicon, const AgentSettings& settings);

DeciderOutcome ner_decider(ChatClient& client, std::string_view transcript, const EntrySet& roster,
                           const AgentSettings& settings);

/// An empty jargon list is NO without a call. A YES is overridden when the
/// topic + jargon template sentence would not fit the hard token limit.
DeciderOutcome jargon_decider(ChatClient& client, std::string_view transcript, std::string_view topic,
                              std::span<const std::string> jargon, const AgentSettings& settings);

/// At most 3 roster display strings, in the agent's order.
std::vector<std::string> best_candidates(ChatClient& client, std::string_view transcript, const EntrySet& roster,
                                         const AgentSettings& settings);

/// Exactly one sentence ending in '.', containing every name verbatim and
/// after the topic when the topic is quoted. template_sentence after the
/// retries run out.
std::string sentence_builder(ChatClient& client, const std::string& topic, std::span<const std::string> names,
                             std::span<const std::string> jargon, const AgentSettings& settings);

/// Null when the sentence passes the builder's checks, else the reason.
std::optional<std::string> check_sentence(std::string_view sentence, std::string_view topic,
                                          std::span<const std::string> names, std::span<const std::string> jargon);

/// Copy-edited transcript with the same number of lines, else the input.
std::string fix_agent(ChatClient& client, std::string_view transcript, const AgentSettings& settings);

/// Deterministic stand-in for the chat model. It recognises each agent by its
/// system prompt, reads the JSON payload and answers the way the instructions
/// ask, using the fuzzy matchers and extractors of this library. Useful
/// offline and for freezing scripted fixtures.
class LocalAgentClient final : public ChatClient {
 public:
  LocalAgentClient(const Lexicon& lexicon, AgentSettings settings, JargonOptions jargon = {});

  std::string complete(const std::string& system, const std::string& user, const DecodeParams& params) override;

 private:
  std::string topic(const std::string& transcript) const;
  std::string names(const std::string& transcript) const;
  std::string jargon(const std::string& transcript) const;
  std::string ner_decision(const std::string& transcript) const;
  std::string jargon_decision(const std::string& transcript, const std::string& topic,
                              const std::vector<std::string>& terms) const;
  std::string ranked_names(const std::string& transcript) const;
  std::string sentence(const std::string& topic, const std::vector<std::string>& names,
                       const std::vector<std::string>& jargon) const;
  std::string fix(const std::string& transcript) const;

  const Lexicon& lexicon_;
  AgentSettings settings_;
  JargonOptions jargon_;
};

}  // namespace courtside
