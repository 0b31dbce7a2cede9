#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "courtside/asr.hpp"
#include "courtside/error.hpp"
#include "httplib.h"
#include "json.hpp"
#include "url.hpp"

namespace courtside {

namespace {

class HttpAsrBackend final : public AsrBackend {
 public:
  explicit HttpAsrBackend(const HttpAsrOptions& options) : options_(options), url_(detail::split_url(options.endpoint)) {}

  std::string transcribe(const std::string& audio_ref, const std::optional<std::string>& initial_prompt) override {
    std::ifstream in(audio_ref, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read audio file " + audio_ref);
    std::ostringstream audio;
    audio << in.rdbuf();

    httplib::MultipartFormDataItems items{
        {"audio", audio.str(), std::filesystem::path(audio_ref).filename().string(), "application/octet-stream"},
    };
    if (initial_prompt) items.push_back({"initial_prompt", *initial_prompt, "", ""});
    if (!options_.model.empty()) items.push_back({"model", options_.model, "", ""});

    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto wait = std::chrono::duration<double>(options_.backoff_seconds * double(1 << (attempt - 1)));
        spdlog::warn("ASR request failed ({}), retry {}", last_error, attempt);
        std::this_thread::sleep_for(wait);
      }
      httplib::Client client(url_.origin);
      auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::duration<double>(options_.timeout_seconds));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      auto res = client.Post(url_.path, items);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorCode::asr, "ASR server returned HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      try {
        return nlohmann::json::parse(res->body).at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::asr, std::string("malformed ASR response: ") + e.what());
      }
    }
    throw Error(ErrorCode::transport, "ASR server unreachable: " + last_error);
  }

 private:
  HttpAsrOptions options_;
  detail::SplitUrl url_;
};

}  // namespace

std::unique_ptr<AsrBackend> make_http_asr_backend(const HttpAsrOptions& options) {
  return std::make_unique<HttpAsrBackend>(options);
}

}  // namespace courtside
