#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <spdlog/spdlog.h>

#include "courtside/chat.hpp"
#include "courtside/error.hpp"
#include "httplib.h"
#include "json.hpp"
#include "url.hpp"

namespace courtside {

namespace {

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(const HttpChatOptions& options)
      : options_(options), url_(detail::split_url(options.endpoint)), slots_(std::max(1, options.max_in_flight)) {
    if (!options.api_key_env.empty()) {
      const char* key = std::getenv(options.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw Error(ErrorCode::config, "environment variable " + options.api_key_env + " is not set");
      }
      key_ = key;
    }
  }

  std::string complete(const std::string& system, const std::string& user, const DecodeParams& params) override {
    nlohmann::json body = {
        {"model", options_.model},
        {"messages", {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    const std::string payload = body.dump();

    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto wait = std::chrono::duration<double>(options_.backoff_seconds * double(1 << (attempt - 1)));
        spdlog::warn("chat request failed ({}), retry {} in {:.1f}s", last_error, attempt, wait.count());
        std::this_thread::sleep_for(wait);
      }
      httplib::Client client(url_.origin);
      auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::duration<double>(options_.timeout_seconds));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);

      auto res = client.Post(url_.path, headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorCode::chat, "chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::chat, std::string("malformed chat response: ") + e.what());
      }
    }
    throw Error(ErrorCode::transport, "chat endpoint unreachable: " + last_error);
  }

 private:
  HttpChatOptions options_;
  detail::SplitUrl url_;
  std::string key_;
  std::counting_semaphore<> slots_;
};

}  // namespace

std::unique_ptr<ChatClient> make_http_chat_client(const HttpChatOptions& options) {
  return std::make_unique<HttpChatClient>(options);
}

}  // namespace courtside
