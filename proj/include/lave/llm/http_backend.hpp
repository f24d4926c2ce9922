#pragma once

// Client for OpenAI-compatible completion services.
//
//   chat mode:       POST {base}/chat/completions, prompt sent as one user message
//   completion mode: POST {base}/completions
//
// The API key comes from the LAVE_API_KEY environment variable only.
// 429 and 5xx responses (and transport failures) are retried with
// exponential backoff until the retry budget runs out.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"
#include "lave/http.hpp"
#include "lave/llm/backend.hpp"

namespace lave::llm {

enum class Protocol { chat, completion };

struct HttpBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  Protocol protocol = Protocol::chat;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  int timeout_seconds = 60;
  std::string api_key_env = "LAVE_API_KEY";
};

class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendOptions options,
                       Sleeper sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
      : options_(std::move(options)), url_(BaseUrl::parse(options_.base_url)), sleep_(std::move(sleep)) {
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) api_key_ = key;
  }

  std::string complete(const CompletionRequest& request) override {
    const std::string path =
        url_.prefix + (options_.protocol == Protocol::chat ? "/chat/completions" : "/completions");
    const std::string body = request_body(request).dump();
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::chrono::milliseconds backoff = options_.initial_backoff;
    std::string last_failure;
    bool last_was_rate_limit = false;
    for (int attempt = 0;; ++attempt) {
      auto client = url_.client(options_.timeout_seconds);
      auto res = client->Post(path, headers, body, "application/json");
      if (res && res->status == 200) return extract_text(res->body);

      if (res && (res->status == 401 || res->status == 403))
        throw AuthError("completion service rejected credentials (HTTP " + std::to_string(res->status) + ")");
      const bool retryable = !res || res->status == 429 || res->status >= 500;
      last_was_rate_limit = res && res->status == 429;
      last_failure = res ? "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200)
                         : "transport error: " + httplib::to_string(res.error());
      if (!retryable) throw BackendError("completion request failed, " + last_failure);
      if (attempt >= options_.max_retries) break;

      sleep_(backoff);
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
    if (last_was_rate_limit) throw RateLimitError("rate limited after retries: " + last_failure);
    throw TransportError("completion request failed after retries, " + last_failure);
  }

  std::string tag() const override {
    return options_.protocol == Protocol::chat ? "openai-chat" : "openai-completion";
  }

  nlohmann::json request_body(const CompletionRequest& r) const {
    nlohmann::json j{{"model", r.model}, {"temperature", r.temperature}, {"max_tokens", r.max_tokens}};
    if (options_.protocol == Protocol::chat)
      j["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", r.prompt}}});
    else
      j["prompt"] = r.prompt;
    if (r.stop) j["stop"] = *r.stop;
    return j;
  }

 private:
  HttpBackendOptions options_;
  BaseUrl url_;
  Sleeper sleep_;
  std::string api_key_;

  std::string extract_text(const std::string& body) const {
    try {
      const auto j = nlohmann::json::parse(body);
      const auto& choice = j.at("choices").at(0);
      if (options_.protocol == Protocol::chat) return choice.at("message").at("content").get<std::string>();
      return choice.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what());
    }
  }
};

}  // namespace lave::llm
