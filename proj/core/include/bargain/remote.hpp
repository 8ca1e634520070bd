#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bargain/chat.hpp"

namespace bargain {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpRequest {
  std::string base_url;
  std::string path;
  Headers headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Connection-level failure (refused, reset, timed out). Retryable.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib client. https needs the library built with OpenSSL.
std::unique_ptr<Transport> make_http_transport();

/// Refuses every request; installed by --offline.
class OfflineTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(std::chrono::milliseconds d) override;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
};

/// Full-jitter exponential backoff: uniform in [0, base * 2^(failed_attempt - 1)].
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int failed_attempt,
                                        std::mt19937_64& rng);

/// Token bucket holding up to one minute of requests; shared by all backends
/// of one provider.
class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, Clock& clock);
  void acquire();

 private:
  std::mutex mu_;
  double capacity_;
  double tokens_;
  double per_ms_;
  Clock& clock_;
  Clock::time_point last_;
};

struct ProviderSettings {
  std::string base_url;
  std::string api_key;
  double requests_per_minute = 60.0;
};

std::string default_base_url(EngineFamily family);
/// Environment variable holding the provider's API key.
std::string api_key_env_var(EngineFamily family);

struct RenderedCall {
  std::string path;
  std::string body;
};

/// claude: "\n\nHuman: " / "\n\nAssistant: " turns, system prompt as the first
/// human turn. j2: every turn followed by "##\n##\n". gpt and cohere: JSON
/// message lists.
std::string render_prompt_text(EngineFamily family, const ChatRequest& request);
RenderedCall render_request(const EngineId& engine, const ChatRequest& request);
/// Inverse of render_request.
ChatRequest parse_rendered(const EngineId& engine, const std::string& body);
std::string parse_response_text(EngineFamily family, const std::string& body);
Headers auth_headers(EngineFamily family, const std::string& api_key);

class RemoteChatBackend : public ChatBackend {
 public:
  /// Throws ConfigError when the key is missing or the engine is not remote.
  RemoteChatBackend(EngineId engine, ProviderSettings settings, RetryPolicy retry,
                    Transport& transport, Clock& clock,
                    std::shared_ptr<RateLimiter> limiter = nullptr,
                    std::uint64_t jitter_seed = 0);

  ChatResponse complete(const ChatRequest& request) override;

  int attempts_made() const { return attempts_; }

 private:
  EngineId engine_;
  ProviderSettings settings_;
  RetryPolicy retry_;
  Transport& transport_;
  Clock& clock_;
  std::shared_ptr<RateLimiter> limiter_;
  std::mt19937_64 jitter_;
  int attempts_ = 0;
};

}  // namespace bargain
