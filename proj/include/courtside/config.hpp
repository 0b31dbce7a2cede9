#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/agents.hpp"
#include "courtside/asr.hpp"
#include "courtside/chat.hpp"
#include "courtside/extraction.hpp"
#include "courtside/lexicon.hpp"
#include "courtside/manifest.hpp"
#include "courtside/pipeline.hpp"

namespace courtside {

enum class BackendKind { mock, http };
enum class ChatKind { http, scripted, local };

/// Everything a run needs. Relative paths in the file are resolved against the
/// file's directory when it is loaded.
struct RunConfig {
  std::filesystem::path roster;
  std::filesystem::path glossary;
  std::string domain_label = "NBA basketball commentary";
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> background;

  BackendKind backend = BackendKind::mock;
  CorruptionModel corruption;  // rng_seed is taken from `seed`
  HttpAsrOptions asr_http;

  ChatKind chat = ChatKind::local;
  HttpChatOptions chat_http;
  std::filesystem::path scripted_fixture;
  std::optional<std::filesystem::path> record_to;  // save every exchange as a scripted fixture

  AgentSettings agents;
  std::optional<std::filesystem::path> bpe_vocab;  // with bpe_merges, count tokens exactly
  std::optional<std::filesystem::path> bpe_merges;
  double salience_critical = 3.84;
  double out_of_domain_threshold = 0.60;
  double safeguard_ratio = 0.80;

  std::size_t workers = 4;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs";

  /// Thresholds in range and every referenced file present. Throws
  /// Error(config) with the offending key in the message.
  void validate() const;

  PipelineConfig pipeline_config() const;
};

/// Replaces ${NAME} with the environment variable's value. An unset variable
/// throws Error(config); "$$" is a literal dollar sign.
std::string interpolate_env(std::string_view text);

/// JSON with ${VAR} interpolation in every string value. Unknown keys are
/// rejected so typos surface early. Throws Error(config) or Error(io).
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Owns the lexicon, extraction resources, chat client and backend described
/// by a config.
class Session {
 public:
  explicit Session(RunConfig config);
  ~Session();

  const RunConfig& config() const { return config_; }
  const Lexicon& lexicon() const { return lexicon_; }

  /// The chat client, or null for variants that need none. Created on first
  /// use so baseline runs never touch chat credentials.
  ChatClient* client();

  /// A backend for this manifest. The mock reads each segment's ground truth
  /// as the spoken text.
  std::unique_ptr<AsrBackend> make_backend(const std::vector<Segment>& manifest) const;

  /// Writes the recorded exchanges when `record_to` is set.
  void finish();

 private:
  RunConfig config_;
  Lexicon lexicon_;
  StopwordSet stopwords_;
  std::optional<FrequencyTable> background_;
  std::unique_ptr<ChatClient> client_;
  std::unique_ptr<RecordingClient> recorder_;
};

}  // namespace courtside
