#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/error.hpp"

namespace sisynth {

struct RetryPolicy {
  int max_attempts = 4;
  double base_backoff_s = 1.0;
  double max_backoff_s = 30.0;
};

/// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry);

enum class ProviderKind : std::uint8_t { kOpenAiCompatible, kMock };

/// Connection settings for one chat-completion provider. The secret itself is
/// never part of a profile; only the name of the environment variable that
/// holds it.
struct ProviderProfile {
  std::string name;
  ProviderKind kind = ProviderKind::kOpenAiCompatible;
  std::string endpoint;
  std::string model_id;
  std::string auth_env_var;
  double temperature = 1.0;
  int max_tokens = 2048;
  double timeout_s = 60.0;
  RetryPolicy retry;
  /// Mock only: directory of <prompt-hash>.txt fixture responses.
  std::string fixtures_dir;

  /// Throws kConfig on negative temperature, max_attempts < 1, etc.
  void validate() const;
};

void to_json(nlohmann::json& j, const ProviderProfile& profile);
void from_json(const nlohmann::json& j, ProviderProfile& profile);

/// A mock profile that speaks the chat-completion shape without a network.
ProviderProfile mock_profile(std::string name = "mock", std::string model_id = "mock-gpt");

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  long long total_tokens = 0;
};

struct RawCompletion {
  std::string job_id;
  std::size_t request_index = 0;
  std::string provider;
  std::string prompt_hash;
  std::string response_text;  // verbatim message content
  int http_status = 0;
  int attempts = 0;
  std::string started_at;
  std::string finished_at;
  std::optional<TokenUsage> token_usage;
};

void to_json(nlohmann::json& j, const RawCompletion& c);
void from_json(const nlohmann::json& j, RawCompletion& c);

/// Raised for provider failures. `status` is the last HTTP status seen
/// (0 when no response arrived).
class ProviderError : public Error {
 public:
  ProviderError(ErrorCode code, const std::string& message, int status, int attempts)
      : Error(code, message), status_(status), attempts_(attempts) {}
  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int status_;
  int attempts_;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  /// Nonempty when no HTTP response was received (connect failure, timeout).
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (http and https).
std::shared_ptr<HttpTransport> make_http_transport();

/// Request body: {model, messages:[{role:"user", content}], temperature,
/// max_tokens[, seed]}.
std::string build_chat_request(const ProviderProfile& profile, std::string_view prompt,
                               std::optional<std::uint64_t> seed);

struct ChatEnvelope {
  std::string content;
  std::optional<TokenUsage> usage;
};
/// Reads choices[0].message.content; throws kProtocol on any deviation.
ChatEnvelope parse_chat_response(std::string_view body);

/// One provider, with the retry loop. Thread-safe for concurrent complete().
class ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  using Clock = std::function<std::string()>;

  /// A null transport selects the mock provider for mock profiles and the
  /// HTTP transport otherwise.
  explicit ChatClient(ProviderProfile profile, std::shared_ptr<HttpTransport> transport = nullptr);

  const ProviderProfile& profile() const { return profile_; }

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  void set_clock(Clock clock) { clock_ = std::move(clock); }

  /// Sends one prompt. Retries timeouts, 408, 429 and 5xx with exponential
  /// backoff; 401/403 are fatal immediately.
  RawCompletion complete(std::string_view prompt, std::optional<std::uint64_t> seed = std::nullopt) const;

 private:
  ProviderProfile profile_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  Clock clock_;
};

RawCompletion complete(const ProviderProfile& profile, std::string_view prompt);

/// Current UTC time as ISO-8601 with milliseconds.
std::string utc_timestamp();

}  // namespace sisynth
