#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "courtside/config.hpp"
#include "courtside/error.hpp"
#include "json.hpp"

namespace courtside {

std::string interpolate_env(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$' || i + 1 >= text.size()) {
      out += text[i];
      continue;
    }
    if (text[i + 1] == '$') {
      out += '$';
      ++i;
      continue;
    }
    if (text[i + 1] != '{') {
      out += '$';
      continue;
    }
    auto close = text.find('}', i + 2);
    if (close == std::string_view::npos) throw Error(ErrorCode::config, "unterminated ${ in '" + std::string(text) + "'");
    std::string name(text.substr(i + 2, close - i - 2));
    if (name.empty()) throw Error(ErrorCode::config, "empty ${} in '" + std::string(text) + "'");
    const char* value = std::getenv(name.c_str());
    if (!value) throw Error(ErrorCode::config, "environment variable " + name + " is not set");
    out += value;
    i = close;
  }
  return out;
}

namespace {

using Json = nlohmann::json;

void interpolate_tree(Json& j) {
  if (j.is_string()) {
    j = interpolate_env(j.get<std::string>());
  } else if (j.is_structured()) {
    for (auto& item : j) interpolate_tree(item);
  }
}

// Reads one JSON object and insists every key was consumed.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorCode::config, name_ + " must be an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw Error(ErrorCode::config, "unknown key " + name_ + "." + key);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  template <class T>
  void read(const std::string& key, T& target) {
    used_.insert(key);
    if (!has(key)) return;
    try {
      target = j_[key].get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::config, name_ + "." + key + " has the wrong type");
    }
  }

  void read_path(const std::string& key, std::filesystem::path& target, const std::filesystem::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) target = resolve(s, base);
  }

  void read_path(const std::string& key, std::optional<std::filesystem::path>& target,
                 const std::filesystem::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) target = resolve(s, base);
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    static const Json empty = Json::object();
    return Section(has(key) ? j_[key] : empty, name_ + "." + key);
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_[key];
  }

 private:
  static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
    std::filesystem::path p(s);
    return p.is_relative() ? base / p : p;
  }

  const Json& j_;
  std::string name_;
  std::set<std::string> used_;
};

void require_unit(double value, const char* key) {
  if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::config, std::string(key) + " must be within [0, 1]");
}

void require_file(const std::filesystem::path& p, const char* key) {
  if (!std::filesystem::is_regular_file(p)) {
    throw Error(ErrorCode::config, std::string(key) + ": file not found: " + p.string());
  }
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  interpolate_tree(root);

  RunConfig c;
  Section top(root, "config");
  {
    auto s = top.sub("lexicon");
    s.read_path("roster", c.roster, base_dir);
    s.read_path("glossary", c.glossary, base_dir);
    s.read("domain_label", c.domain_label);
    s.read_path("stopwords", c.stopwords, base_dir);
    s.read_path("background", c.background, base_dir);
  }
  {
    auto s = top.sub("backend");
    std::string kind = "mock";
    s.read("kind", kind);
    if (kind == "mock") {
      c.backend = BackendKind::mock;
      s.read("name_sub_rate", c.corruption.name_sub_rate);
      s.read("jargon_corrupt_rate", c.corruption.jargon_corrupt_rate);
      s.read("accent_rate", c.corruption.accent_rate);
      s.read("segmentation_rate", c.corruption.segmentation_rate);
      s.read("prompt_rescue_prob", c.corruption.prompt_rescue_prob);
      s.read("prompt_hallucination_prob", c.corruption.prompt_hallucination_prob);
    } else if (kind == "http") {
      c.backend = BackendKind::http;
      s.read("endpoint", c.asr_http.endpoint);
      s.read("model", c.asr_http.model);
      s.read("timeout_seconds", c.asr_http.timeout_seconds);
      s.read("max_retries", c.asr_http.max_retries);
      s.read("backoff_seconds", c.asr_http.backoff_seconds);
    } else {
      throw Error(ErrorCode::config, "backend.kind must be mock or http, not '" + kind + "'");
    }
  }
  {
    auto s = top.sub("chat");
    std::string kind = "local";
    s.read("kind", kind);
    s.read_path("record", c.record_to, base_dir);
    if (kind == "local") {
      c.chat = ChatKind::local;
    } else if (kind == "scripted") {
      c.chat = ChatKind::scripted;
      s.read_path("fixture", c.scripted_fixture, base_dir);
      if (c.scripted_fixture.empty()) throw Error(ErrorCode::config, "chat.fixture is required for scripted chat");
    } else if (kind == "http") {
      c.chat = ChatKind::http;
      s.read("endpoint", c.chat_http.endpoint);
      s.read("model", c.chat_http.model);
      s.read("api_key_env", c.chat_http.api_key_env);
      s.read("timeout_seconds", c.chat_http.timeout_seconds);
      s.read("max_retries", c.chat_http.max_retries);
      s.read("backoff_seconds", c.chat_http.backoff_seconds);
      s.read("max_in_flight", c.chat_http.max_in_flight);
    } else {
      throw Error(ErrorCode::config, "chat.kind must be http, scripted or local, not '" + kind + "'");
    }
  }
  {
    auto s = top.sub("thresholds");
    s.read("match", c.agents.match_threshold);
    s.read("replace", c.agents.replace_threshold);
    s.read("jargon", c.agents.jargon_threshold);
    s.read("salience", c.salience_critical);
    s.read("out_of_domain", c.out_of_domain_threshold);
    s.read("safeguard", c.safeguard_ratio);
  }
  {
    auto s = top.sub("budget");
    s.read("hard_limit", c.agents.budget.hard_limit);
    s.read("target_limit", c.agents.budget.target_limit);
    s.read_path("bpe_vocab", c.bpe_vocab, base_dir);
    s.read_path("bpe_merges", c.bpe_merges, base_dir);
  }
  {
    auto s = top.sub("agents");
    s.read("max_retries", c.agents.max_retries);
    s.read("fallback_topic", c.agents.fallback_topic);
    s.read("temperature", c.agents.decode.temperature);
    s.read("max_tokens", c.agents.decode.max_tokens);
    auto shots = s.sub("few_shot");
    if (s.has("few_shot")) {
      for (const auto& [name, text] : s.raw("few_shot").items()) {
        AgentKind kind;
        try {
          kind = agent_kind_from_string(name);
        } catch (const Error&) {
          throw Error(ErrorCode::config, "agents.few_shot: unknown agent '" + name + "'");
        }
        std::string value;
        shots.read(name, value);
        c.agents.few_shot[kind] = value;
      }
    }
  }
  top.read("workers", c.workers);
  top.read("seed", c.seed);
  top.read_path("output_dir", c.output_dir, base_dir);
  if (!top.has("output_dir")) c.output_dir = base_dir / "runs";
  c.corruption.rng_seed = c.seed;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto base = path.parent_path();
  return parse_config(ss.str(), base.empty() ? std::filesystem::path(".") : base);
}

void RunConfig::validate() const {
  if (roster.empty()) throw Error(ErrorCode::config, "lexicon.roster is required");
  if (glossary.empty()) throw Error(ErrorCode::config, "lexicon.glossary is required");
  require_file(roster, "lexicon.roster");
  require_file(glossary, "lexicon.glossary");
  if (stopwords) require_file(*stopwords, "lexicon.stopwords");
  if (background) require_file(*background, "lexicon.background");
  if (chat == ChatKind::scripted) require_file(scripted_fixture, "chat.fixture");
  if (bpe_vocab.has_value() != bpe_merges.has_value()) {
    throw Error(ErrorCode::config, "budget.bpe_vocab and budget.bpe_merges go together");
  }
  if (bpe_vocab) {
    require_file(*bpe_vocab, "budget.bpe_vocab");
    require_file(*bpe_merges, "budget.bpe_merges");
  }
  try {
    if (backend == BackendKind::mock) corruption.validate();
    agents.budget.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  require_unit(agents.match_threshold, "thresholds.match");
  require_unit(agents.replace_threshold, "thresholds.replace");
  require_unit(agents.jargon_threshold, "thresholds.jargon");
  require_unit(out_of_domain_threshold, "thresholds.out_of_domain");
  require_unit(safeguard_ratio, "thresholds.safeguard");
  if (agents.match_threshold > agents.replace_threshold) {
    throw Error(ErrorCode::config, "thresholds.match must not exceed thresholds.replace");
  }
  if (salience_critical < 0.0) throw Error(ErrorCode::config, "thresholds.salience must be non-negative");
  if (agents.max_retries < 0) throw Error(ErrorCode::config, "agents.max_retries must be non-negative");
  if (workers == 0) throw Error(ErrorCode::config, "workers must be at least 1");
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig p;
  p.agents = agents;
  p.safeguard_ratio = safeguard_ratio;
  p.out_of_domain_threshold = out_of_domain_threshold;
  return p;
}

Session::Session(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  lexicon_ = Lexicon::make(load_roster(config_.roster), load_glossary(config_.glossary), config_.domain_label);
  stopwords_ = config_.stopwords ? load_stopwords(*config_.stopwords) : default_stopwords();
  if (config_.background) background_ = FrequencyTable::load(*config_.background);
  if (config_.bpe_vocab) {
    config_.agents.budget.tokenizer =
        std::make_shared<BpeTokenizer>(BpeTokenizer::load(*config_.bpe_vocab, *config_.bpe_merges));
  }
}

Session::~Session() = default;

ChatClient* Session::client() {
  if (recorder_) return recorder_.get();
  if (client_) return client_.get();
  switch (config_.chat) {
    case ChatKind::local: {
      JargonOptions opts;
      opts.salience_critical = config_.salience_critical;
      opts.stopwords = &stopwords_;
      opts.background = background_ ? &*background_ : nullptr;
      client_ = std::make_unique<LocalAgentClient>(lexicon_, config_.agents, opts);
      break;
    }
    case ChatKind::scripted:
      client_ = std::make_unique<ScriptedClient>(ScriptedClient::load(config_.scripted_fixture));
      break;
    case ChatKind::http:
      client_ = make_http_chat_client(config_.chat_http);
      break;
  }
  if (config_.record_to) {
    recorder_ = std::make_unique<RecordingClient>(*client_, [](const std::string& system) {
      auto kind = agent_for_system(system);
      return kind ? std::string(to_string(*kind)) : std::string();
    });
    return recorder_.get();
  }
  return client_.get();
}

std::unique_ptr<AsrBackend> Session::make_backend(const std::vector<Segment>& manifest) const {
  if (config_.backend == BackendKind::http) return make_http_asr_backend(config_.asr_http);
  std::map<std::string, std::string> truths;
  for (const auto& seg : manifest) {
    if (seg.ground_truth) truths[seg.audio_ref] = *seg.ground_truth;
  }
  return std::make_unique<MockAsrBackend>(config_.corruption, lexicon_, std::move(truths));
}

void Session::finish() {
  if (recorder_ && config_.record_to) {
    recorder_->save(*config_.record_to);
    spdlog::info("recorded {} chat exchanges to {}", recorder_->entries().size(), config_.record_to->string());
  }
}

}  // namespace courtside
