#include <algorithm>

#include "courtside/agents.hpp"
#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

namespace {

std::vector<std::string> field_list(const nlohmann::json& payload, const char* key) {
  std::vector<std::string> out;
  if (!payload.contains(key)) return out;
  const auto& v = payload[key];
  if (v.is_array()) {
    for (const auto& item : v) out.push_back(item.get<std::string>());
    return out;
  }
  std::string item;
  for (char c : v.get<std::string>() + ",") {
    if (c == ',') {
      if (!trim(item).empty()) out.push_back(trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

std::string verdict_json(bool yes, const std::string& reason) {
  nlohmann::ordered_json j{{"Answer", yes ? "YES" : "NO"}, {"Reason", reason}};
  return j.dump();
}

void push_unique(std::vector<std::string>& out, const std::string& value) {
  if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(value);
}

}  // namespace

LocalAgentClient::LocalAgentClient(const Lexicon& lexicon, AgentSettings settings, JargonOptions jargon)
    : lexicon_(lexicon), settings_(std::move(settings)), jargon_(jargon) {
  jargon_.threshold = settings_.match_threshold;
  jargon_.roster = lexicon_.names.entries();
}

std::string LocalAgentClient::complete(const std::string& system, const std::string& user, const DecodeParams&) {
  auto kind = agent_for_system(system);
  if (!kind) throw Error(ErrorCode::chat, "local agent client does not recognise this system prompt");
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(user);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::chat, std::string("local agent client needs a JSON payload: ") + e.what());
  }
  auto text = [&](const char* key) { return payload.value(key, std::string()); };

  switch (*kind) {
    case AgentKind::topic: return topic(text("transcript"));
    case AgentKind::ner: return names(text("transcript"));
    case AgentKind::jargon: return jargon(text("transcript"));
    case AgentKind::ner_decider: return ner_decision(text("transcript"));
    case AgentKind::jargon_decider:
      return jargon_decision(text("transcript"), text("topic"), field_list(payload, "jargon_list"));
    case AgentKind::best_candidates: return ranked_names(text("transcript"));
    case AgentKind::sentence_builder:
      return sentence(text("topic"), field_list(payload, "names_list"), field_list(payload, "jargon_list"));
    case AgentKind::fix: return fix(text("transcript"));
  }
  throw Error(ErrorCode::internal, "unhandled agent kind");
}

std::string LocalAgentClient::topic(const std::string& transcript) const {
  bool in_domain = !jargon_candidates(normalize(transcript), lexicon_.jargon, jargon_).empty();
  if (!in_domain) {
    for (const auto& hit : scan_names(transcript, lexicon_.names.entries(), settings_.replace_threshold)) {
      in_domain = in_domain || hit.match.accepted;
    }
  }
  if (in_domain && !lexicon_.domain_label.empty()) return lexicon_.domain_label;
  return "general spoken conversation";
}

std::string LocalAgentClient::names(const std::string& transcript) const {
  std::vector<std::string> out;
  for (const auto& hit : scan_names(transcript, lexicon_.names.entries(), settings_.match_threshold)) {
    if (!hit.match.accepted) continue;
    push_unique(out, hit.match.score >= settings_.replace_threshold ? hit.match.canonical : hit.surface);
  }
  return join(out, ", ");
}

std::string LocalAgentClient::jargon(const std::string& transcript) const {
  return join(jargon_candidates(normalize(transcript), lexicon_.jargon, jargon_), ", ");
}

std::string LocalAgentClient::ner_decision(const std::string& transcript) const {
  std::vector<std::string> misspelled;
  for (const auto& hit : scan_names(transcript, lexicon_.names.entries(), settings_.match_threshold)) {
    if (hit.match.accepted && hit.match.score < 1.0) push_unique(misspelled, hit.surface + " -> " + hit.match.canonical);
  }
  if (misspelled.empty()) return verdict_json(false, "all names match the lexicon exactly");
  return verdict_json(true, "misspelled: " + join(misspelled, "; "));
}

std::string LocalAgentClient::jargon_decision(const std::string& transcript, const std::string& topic,
                                              const std::vector<std::string>& terms) const {
  const NormalizedText text = normalize(transcript);
  std::vector<std::string> misspelled;
  for (const auto& term : terms) {
    const auto words = normalize(term).words;
    if (words.empty()) continue;
    if (std::search(text.words.begin(), text.words.end(), words.begin(), words.end()) != text.words.end()) continue;
    const std::string target = normalize_joined(term);
    double best = 0.0;
    for (std::size_t n = std::max<std::size_t>(1, words.size() - 1); n <= words.size() + 1; ++n) {
      for (std::size_t i = 0; i + n <= text.words.size(); ++i) {
        std::span<const std::string> window(text.words.data() + i, n);
        best = std::max(best, combined_similarity_normalized(join(window, " "), target));
      }
    }
    if (best >= settings_.match_threshold) misspelled.push_back(term);
  }
  if (misspelled.empty()) return verdict_json(false, "no listed term is misspelled");
  std::size_t tokens = count_tokens(template_sentence(topic, {}, terms), settings_.budget);
  if (tokens > settings_.budget.hard_limit) return verdict_json(false, "prompt budget exceeded");
  return verdict_json(true, "misspelled: " + join(misspelled, ", "));
}

std::string LocalAgentClient::ranked_names(const std::string& transcript) const {
  struct Ranked {
    std::string name;
    double score;
  };
  std::vector<Ranked> ranked;
  for (const auto& hit : scan_names(transcript, lexicon_.names.entries(), settings_.match_threshold)) {
    if (!hit.match.accepted || hit.match.score >= 1.0) continue;
    auto it = std::find_if(ranked.begin(), ranked.end(), [&](const Ranked& r) { return r.name == hit.match.canonical; });
    if (it == ranked.end()) {
      ranked.push_back({hit.match.canonical, hit.match.score});
    } else {
      it->score = std::max(it->score, hit.match.score);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  nlohmann::ordered_json out{{"names", nlohmann::json::array()}};
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) out["names"].push_back(ranked[i].name);
  return out.dump();
}

std::string LocalAgentClient::sentence(const std::string& topic, const std::vector<std::string>& names,
                                       const std::vector<std::string>& jargon) const {
  std::string out = trim(topic);
  while (!out.empty() && out.back() == '.') out.pop_back();
  if (!jargon.empty()) out += " covering " + join_list(jargon);
  if (!names.empty()) out += std::string(jargon.empty() ? "" : ",") + " with " + join_list(names);
  return out.ends_with('.') ? out : out + ".";
}

std::string LocalAgentClient::fix(const std::string& transcript) const {
  std::string out;
  std::size_t start = 0;
  while (start <= transcript.size()) {
    auto end = transcript.find('\n', start);
    std::string line = transcript.substr(start, end == std::string::npos ? std::string::npos : end - start);
    for (const auto& hit : scan_names(line, lexicon_.names.entries(), settings_.replace_threshold)) {
      if (!hit.match.accepted || hit.match.score >= 1.0) continue;
      if (auto at = line.find(hit.surface); at != std::string::npos) line.replace(at, hit.surface.size(), hit.match.canonical);
    }
    out += line;
    if (end == std::string::npos) break;
    out += '\n';
    start = end + 1;
  }
  return out;
}

}  // namespace courtside
