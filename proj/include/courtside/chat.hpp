#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

struct DecodeParams {
  double temperature = 0.0;
  int max_tokens = 512;
};

/// One chat-completion call: system instructions plus a user payload in, the
/// assistant text out. Implementations keep no state between calls and throw
/// Error (chat or transport) on failure.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& system, const std::string& user, const DecodeParams& params) = 0;
};

/// FNV-1a 64 of system + '\x1f' + user, as 16 lowercase hex digits.
std::string prompt_hash(std::string_view system, std::string_view user);

struct ScriptedEntry {
  std::string hash;
  std::string response;
  std::string agent;  // informational label only

  bool operator==(const ScriptedEntry&) const = default;
};

/// Replays a fixed request -> response table. A request with no entry throws
/// Error(chat), which agents treat like any other client failure.
class ScriptedClient final : public ChatClient {
 public:
  ScriptedClient() = default;
  explicit ScriptedClient(const std::vector<ScriptedEntry>& entries);

  /// JSON lines of {"hash", "response", "agent"?}.
  static ScriptedClient load(const std::filesystem::path& path);

  void add(std::string_view system, std::string_view user, std::string response, std::string agent = {});
  std::size_t size() const { return table_.size(); }

  std::string complete(const std::string& system, const std::string& user, const DecodeParams& params) override;

 private:
  std::map<std::string, ScriptedEntry> table_;
};

/// Forwards to another client and keeps every exchange, so a live or local run
/// can be frozen into a scripted fixture.
class RecordingClient final : public ChatClient {
 public:
  using Labeler = std::function<std::string(const std::string& system)>;

  explicit RecordingClient(ChatClient& inner, Labeler labeler = {});

  std::string complete(const std::string& system, const std::string& user, const DecodeParams& params) override;

  /// Sorted by hash, so output does not depend on call order.
  std::vector<ScriptedEntry> entries() const;
  void save(const std::filesystem::path& path) const;

 private:
  ChatClient& inner_;
  Labeler labeler_;
  mutable std::mutex mutex_;
  std::map<std::string, ScriptedEntry> seen_;
};

void save_entries(const std::vector<ScriptedEntry>& entries, const std::filesystem::path& path);

struct HttpChatOptions {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";  // empty: no Authorization header
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double backoff_seconds = 1.0;
  int max_in_flight = 4;
};

/// OpenAI-compatible chat/completions over HTTP(S) with bearer auth. Retries
/// transport failures, 429 and 5xx with exponential backoff. Throws
/// Error(config) at construction when the key variable is named but unset.
std::unique_ptr<ChatClient> make_http_chat_client(const HttpChatOptions& options);

}  // namespace courtside
