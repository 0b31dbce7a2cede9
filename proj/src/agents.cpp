#include "courtside/agents.hpp"

#include <algorithm>
#include <array>
#include <functional>

#include <spdlog/spdlog.h>

#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<std::pair<AgentKind, const char*>, 8> kNames{{
    {AgentKind::topic, "topic"},
    {AgentKind::ner, "ner"},
    {AgentKind::jargon, "jargon"},
    {AgentKind::ner_decider, "ner_decider"},
    {AgentKind::jargon_decider, "jargon_decider"},
    {AgentKind::best_candidates, "best_candidates"},
    {AgentKind::sentence_builder, "sentence_builder"},
    {AgentKind::fix, "fix"},
}};

const std::map<AgentKind, std::string>& instructions() {
  static const std::map<AgentKind, std::string> table{
      {AgentKind::topic,
       "Role: topic labeller for speech transcripts.\n"
       "Input: JSON with a \"transcript\" field.\n"
       "Reply with the subject or domain of the transcript in 2 to 5 words. No other text."},
      {AgentKind::ner,
       "Role: person-name extractor for speech transcripts.\n"
       "Input: JSON with \"transcript\", \"topic\" and \"reference_names\" (the domain roster).\n"
       "Find every person mentioned in the transcript. Compare each against the reference names with a "
       "normalized edit-distance similarity. When the best similarity is 0.85 or higher, output the reference "
       "spelling; otherwise output the name as heard.\n"
       "Reply with the names as one comma-separated line, in order of first mention, without duplicates."},
      {AgentKind::jargon,
       "Role: domain terminology extractor for speech transcripts.\n"
       "Input: JSON with \"topic\", \"transcript\" and \"glossary\".\n"
       "Collect candidate terms with keyword extraction (TF-IDF, RAKE, YAKE). Map each candidate onto the "
       "glossary by fuzzy similarity and correct its spelling when the match is 0.90 or higher. Leave out "
       "person names and anything off topic.\n"
       "Reply with the terms as one comma-separated line, without duplicates."},
      {AgentKind::ner_decider,
       "Role: yes/no judge for misspelled person names.\n"
       "Input: JSON with \"transcript\" and \"domain_lexicon\" (correct names).\n"
       "Lowercase and strip punctuation from the names found in the transcript and from the lexicon. A found "
       "name is misspelled when it is similar to a lexicon name (0.85 or higher) without being identical. "
       "Answer YES when at least one name is misspelled, NO otherwise.\n"
       "Reply with JSON only: {\"Answer\": \"YES\" or \"NO\", \"Reason\": short explanation}."},
      {AgentKind::jargon_decider,
       "Role: yes/no judge for adding domain terms to a speech recognizer prompt.\n"
       "Input: JSON with \"transcript\", \"topic\" and \"jargon_list\".\n"
       "After normalizing both sides, check whether any listed term appears misspelled in the transcript "
       "(similarity 0.85 or higher without an exact match) and whether topic plus terms fit in a 224-token "
       "prompt. Answer YES only when both hold.\n"
       "Reply with JSON only: {\"Answer\": \"YES\" or \"NO\", \"Reason\": short explanation}."},
      {AgentKind::best_candidates,
       "Role: ranker of person names most likely misrecognized in a transcript.\n"
       "Input: JSON with \"transcript\" and \"names_list\" (correct names).\n"
       "Score the names heard in the transcript against the list and rank them by how likely they were "
       "misheard. Output the 2 or 3 best, spelled as in the list.\n"
       "Reply with JSON only: {\"names\": [\"...\", \"...\"]}."},
      {AgentKind::sentence_builder,
       "Role: writer of short recognizer prompts.\n"
       "Input: JSON with \"topic\", \"names_list\" and \"jargon_list\".\n"
       "Write one fluent sentence about the topic that uses every name exactly as given and as many of the "
       "terms as read naturally. Put the names after the topic, near the end.\n"
       "Reply with the sentence only."},
      {AgentKind::fix,
       "Role: copy-editor for speech recognizer output.\n"
       "Input: JSON with a \"transcript\" field.\n"
       "Correct clear recognition mistakes in spelling, casing and punctuation. Keep every line where it is: "
       "no merging, splitting, reordering or rewording, and keep speaker labels and timestamps. Leave doubtful "
       "tokens alone.\n"
       "Reply with the corrected transcript only."},
  };
  return table;
}

// Raised by validators; the message is fed back to the model on retry.
struct Rejection {
  std::string reason;
};

std::string strip_fence(std::string_view raw) {
  std::string s = trim(raw);
  if (s.starts_with("```")) {
    auto nl = s.find('\n');
    s = nl == std::string::npos ? std::string() : s.substr(nl + 1);
    if (auto end = s.rfind("```"); end != std::string::npos) s.erase(end);
    s = trim(s);
  }
  return s;
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = trim(s.substr(1, s.size() - 2));
  return s;
}

// Runs an agent with the retry policy. Client errors end the attempt loop at
// once; validator rejections are retried with the reason appended.
template <class T>
std::optional<T> run_agent(ChatClient& client, AgentKind kind, const AgentSettings& settings, const Json& payload,
                           const std::function<T(const std::string&)>& validate) {
  const std::string system = settings.system_prompt(kind);
  Json request = payload;
  for (int attempt = 0; attempt <= settings.max_retries; ++attempt) {
    std::string raw;
    try {
      raw = client.complete(system, request.dump(), settings.decode);
    } catch (const Error& e) {
      spdlog::warn("{} agent: {}", to_string(kind), e.what());
      return std::nullopt;
    }
    try {
      return validate(raw);
    } catch (const Rejection& r) {
      spdlog::debug("{} agent attempt {} rejected: {}", to_string(kind), attempt + 1, r.reason);
      request = payload;
      request["previous_reply"] = raw;
      request["rejected_because"] = r.reason;
    }
  }
  spdlog::warn("{} agent: no valid reply after {} attempts", to_string(kind), settings.max_retries + 1);
  return std::nullopt;
}

std::vector<std::string> parse_list(const std::string& raw) {
  std::string body = strip_fence(raw);
  std::vector<std::string> items;
  if (body.starts_with("[")) {
    try {
      for (const auto& v : nlohmann::json::parse(body)) items.push_back(v.get<std::string>());
    } catch (const nlohmann::json::exception&) {
      throw Rejection{"expected a comma-separated list"};
    }
  } else {
    std::string item;
    for (char c : body + ",") {
      if (c == ',' || c == '\n' || c == ';') {
        items.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
  }
  std::vector<std::string> out;
  for (auto& item : items) {
    std::string s = trim(item);
    if (s.starts_with("- ") || s.starts_with("* ")) s = s.substr(2);
    if (s.starts_with("and ")) s = s.substr(4);
    s = strip_quotes(s);
    while (!s.empty() && s.back() == '.' && !s.ends_with("Jr.") && !s.ends_with("Sr.")) s.pop_back();
    s = trim(s);
    std::string lower = normalize_joined(s);
    if (lower.empty() || lower == "none" || lower == "n a") continue;
    if (split_whitespace(s).size() > 6) throw Rejection{"items must be short names or terms, comma-separated"};
    out.push_back(s);
  }
  return out;
}

bool contains_phrase(const NormalizedText& text, std::string_view normalized_phrase) {
  auto phrase = normalize(normalized_phrase).words;
  if (phrase.empty() || phrase.size() > text.words.size()) return false;
  return std::search(text.words.begin(), text.words.end(), phrase.begin(), phrase.end()) != text.words.end();
}

void push_unique(std::vector<std::string>& out, std::string value) {
  if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(std::move(value));
}

std::string comma_list(const std::vector<std::string>& items) { return join(items, ", "); }

std::size_t line_count(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  if (s.empty()) return 0;
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) + 1;
}

std::vector<ShadowFlag> shadow_check(std::string_view transcript, const EntrySet& roster) {
  std::vector<ShadowFlag> flags;
  for (const auto& hit : scan_names(transcript, roster.entries(), 0.5)) {
    if (hit.match.accepted && hit.match.score < 1.0) {
      flags.push_back({hit.surface, hit.match.canonical, hit.match.score});
    }
  }
  return flags;
}

DeciderVerdict verdict_or_reject(const std::string& raw) {
  try {
    return parse_verdict(raw);
  } catch (const Error& e) {
    throw Rejection{std::string("reply must be JSON with Answer YES or NO: ") + e.what()};
  }
}

}  // namespace

const char* to_string(AgentKind kind) noexcept {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

AgentKind agent_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown agent '" + std::string(name) + "'");
}

const std::string& base_instructions(AgentKind kind) { return instructions().at(kind); }

std::optional<AgentKind> agent_for_system(std::string_view system) {
  for (const auto& [kind, text] : instructions()) {
    if (system.starts_with(text)) return kind;
  }
  return std::nullopt;
}

std::string AgentSettings::system_prompt(AgentKind kind) const {
  std::string out = base_instructions(kind);
  if (auto it = few_shot.find(kind); it != few_shot.end() && !trim(it->second).empty()) {
    out += "\n\nExamples:\n" + trim(it->second);
  }
  return out;
}

DeciderVerdict parse_verdict(std::string_view raw) {
  std::string body = strip_fence(raw);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::parse, "decider reply is not JSON: '" + body.substr(0, 80) + "'");
  }
  if (!j.is_object() || !j.contains("Answer") || !j["Answer"].is_string()) {
    throw Error(ErrorCode::parse, "decider reply lacks a string Answer field");
  }
  std::string answer = trim(j["Answer"].get<std::string>());
  std::transform(answer.begin(), answer.end(), answer.begin(), [](unsigned char c) { return std::toupper(c); });
  if (answer != "YES" && answer != "NO") throw Error(ErrorCode::parse, "decider Answer must be YES or NO, got '" + answer + "'");
  DeciderVerdict v;
  v.yes = answer == "YES";
  if (j.contains("Reason") && j["Reason"].is_string()) v.reason = j["Reason"].get<std::string>();
  return v;
}

TopicResult topic_agent(ChatClient& client, std::string_view transcript, const AgentSettings& settings) {
  if (trim(transcript).empty()) throw Error(ErrorCode::invalid_argument, "topic_agent needs a transcript");
  Json payload{{"transcript", transcript}};
  auto topic = run_agent<std::string>(client, AgentKind::topic, settings, payload, [](const std::string& raw) {
    std::string t = strip_quotes(strip_fence(raw));
    while (!t.empty() && t.back() == '.') t.pop_back();
    if (t.find('\n') != std::string::npos) throw Rejection{"reply must be a single line"};
    auto words = split_whitespace(t);
    if (words.size() < 2 || words.size() > 5) throw Rejection{"topic must be 2 to 5 words"};
    return join(words, " ");
  });
  if (topic) return {*topic, false};
  return {settings.fallback_topic, true};
}

std::vector<std::string> ner_agent(ChatClient& client, std::string_view transcript, std::string_view topic,
                                   const EntrySet& roster, const AgentSettings& settings) {
  Json payload{{"transcript", transcript}, {"topic", topic}, {"reference_names", comma_list(roster.displays())}};
  auto items = run_agent<std::vector<std::string>>(client, AgentKind::ner, settings, payload, parse_list);
  if (!items || roster.empty()) return {};

  const NormalizedText text = normalize(transcript);
  std::vector<std::string> out;
  for (const auto& item : *items) {
    const std::string norm = normalize_joined(item);
    MatchResult m = best_match_normalized(norm, roster.entries(), settings.match_threshold);
    bool keep = m.score >= settings.replace_threshold || (m.accepted && contains_phrase(text, norm));
    if (keep) {
      push_unique(out, m.canonical);
    } else {
      spdlog::debug("ner agent: dropped '{}' (best {} at {:.3f})", item, m.canonical, m.score);
    }
  }
  return out;
}

std::vector<std::string> jargon_agent(ChatClient& client, std::string_view transcript, std::string_view topic,
                                      const Lexicon& lexicon, const AgentSettings& settings) {
  Json payload{{"topic", topic}, {"transcript", transcript}, {"glossary", comma_list(lexicon.jargon.displays())}};
  auto items = run_agent<std::vector<std::string>>(client, AgentKind::jargon, settings, payload, parse_list);
  if (!items || lexicon.jargon.empty()) return {};

  std::vector<std::string> out;
  for (const auto& item : *items) {
    const std::string norm = normalize_joined(item);
    MatchResult term = best_match_normalized(norm, lexicon.jargon.entries(), settings.jargon_threshold);
    if (!term.accepted) continue;
    if (!lexicon.names.empty() &&
        best_match_normalized(norm, lexicon.names.entries(), settings.replace_threshold).accepted) {
      continue;
    }
    push_unique(out, term.canonical);
  }
  return out;
}

DeciderOutcome ner_decider(ChatClient& client, std::string_view transcript, const EntrySet& roster,
                           const AgentSettings& settings) {
  DeciderOutcome outcome;
  outcome.shadow = shadow_check(transcript, roster);
  for (const auto& f : outcome.shadow) {
    spdlog::debug("ner shadow check: '{}' ~ {} ({:.3f})", f.surface, f.canonical, f.score);
  }
  Json payload{{"transcript", transcript}, {"domain_lexicon", comma_list(roster.displays())}};
  auto v = run_agent<DeciderVerdict>(client, AgentKind::ner_decider, settings, payload, verdict_or_reject);
  if (!v) {
    outcome.failed = true;
    outcome.error = "ner decider gave no usable answer";
    return outcome;
  }
  outcome.verdict = *v;
  return outcome;
}

DeciderOutcome jargon_decider(ChatClient& client, std::string_view transcript, std::string_view topic,
                              std::span<const std::string> jargon, const AgentSettings& settings) {
  DeciderOutcome outcome;
  if (jargon.empty()) {
    outcome.verdict = {false, "no jargon candidates"};
    return outcome;
  }
  std::vector<std::string> terms(jargon.begin(), jargon.end());
  Json payload{{"transcript", transcript}, {"topic", topic}, {"jargon_list", comma_list(terms)}};
  auto v = run_agent<DeciderVerdict>(client, AgentKind::jargon_decider, settings, payload, verdict_or_reject);
  if (!v) {
    outcome.failed = true;
    outcome.error = "jargon decider gave no usable answer";
    return outcome;
  }
  outcome.verdict = *v;
  if (outcome.verdict.yes) {
    std::size_t tokens = count_tokens(template_sentence(std::string(topic), {}, terms), settings.budget);
    if (tokens > settings.budget.hard_limit) {
      outcome.verdict = {false, "prompt would need " + std::to_string(tokens) + " tokens, over the limit"};
    }
  }
  return outcome;
}

std::vector<std::string> best_candidates(ChatClient& client, std::string_view transcript, const EntrySet& roster,
                                         const AgentSettings& settings) {
  Json payload{{"transcript", transcript}, {"names_list", comma_list(roster.displays())}};
  auto names = run_agent<std::vector<std::string>>(
      client, AgentKind::best_candidates, settings, payload, [](const std::string& raw) {
        std::vector<std::string> out;
        try {
          auto j = nlohmann::json::parse(strip_fence(raw));
          const auto& list = j.is_array() ? j : j.at("names");
          for (const auto& v : list) out.push_back(v.get<std::string>());
        } catch (const nlohmann::json::exception&) {
          throw Rejection{"reply must be JSON of the form {\"names\": [...]}"};
        }
        return out;
      });
  if (!names) return {};

  std::vector<std::string> out;
  for (const auto& name : *names) {
    MatchResult m = best_match(name, roster.entries(), settings.replace_threshold);
    if (m.accepted) {
      push_unique(out, m.canonical);
    } else {
      spdlog::debug("best candidates: '{}' is not on the roster", name);
    }
    if (out.size() == 3) break;
  }
  return out;
}

std::optional<std::string> check_sentence(std::string_view sentence, std::string_view topic,
                                          std::span<const std::string> names, std::span<const std::string> jargon) {
  std::string s(sentence);
  if (s.empty()) return "empty reply";
  if (s.find('\n') != std::string::npos) return "reply must be one line";
  if (s.back() != '.') return "sentence must end with a period";
  for (const auto& n : names) {
    if (s.find(n) == std::string::npos) return "missing name '" + n + "'";
  }
  if (auto t = s.find(std::string(topic)); !topic.empty() && t != std::string::npos) {
    for (const auto& n : names) {
      if (s.find(n) < t) return "names must come after the topic";
    }
  }
  // Blank out the given phrases so their own punctuation does not count.
  std::string body = s.substr(0, s.size() - 1);
  std::vector<std::string> phrases(names.begin(), names.end());
  phrases.insert(phrases.end(), jargon.begin(), jargon.end());
  phrases.emplace_back(topic);
  std::sort(phrases.begin(), phrases.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& p : phrases) {
    if (p.empty()) continue;
    for (auto at = body.find(p); at != std::string::npos; at = body.find(p, at + 1)) {
      body.replace(at, p.size(), std::string(p.size(), '_'));
    }
  }
  if (body.find_first_of(".!?") != std::string::npos) return "reply must be exactly one sentence";
  return std::nullopt;
}

std::string sentence_builder(ChatClient& client, const std::string& topic, std::span<const std::string> names,
                             std::span<const std::string> jargon, const AgentSettings& settings) {
  if (names.empty() && jargon.empty()) return template_sentence(topic, names, jargon);
  std::vector<std::string> n(names.begin(), names.end()), j(jargon.begin(), jargon.end());
  Json payload{{"topic", topic}, {"names_list", n}, {"jargon_list", j}};
  auto sentence = run_agent<std::string>(client, AgentKind::sentence_builder, settings, payload,
                                         [&](const std::string& raw) {
                                           std::string s = strip_quotes(strip_fence(raw));
                                           if (auto why = check_sentence(s, topic, names, jargon)) throw Rejection{*why};
                                           return s;
                                         });
  return sentence ? *sentence : template_sentence(topic, names, jargon);
}

std::string fix_agent(ChatClient& client, std::string_view transcript, const AgentSettings& settings) {
  if (trim(transcript).empty()) throw Error(ErrorCode::invalid_argument, "fix_agent needs a transcript");
  const std::size_t lines = line_count(transcript);
  Json payload{{"transcript", transcript}};
  auto fixed = run_agent<std::string>(client, AgentKind::fix, settings, payload, [&](const std::string& raw) {
    std::string out = strip_fence(raw);
    if (line_count(out) != lines) {
      throw Rejection{"expected " + std::to_string(lines) + " lines, got " + std::to_string(line_count(out))};
    }
    return out;
  });
  return fixed ? *fixed : std::string(transcript);
}

}  // namespace courtside
