#include "sisynth/llm_gateway.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <thread>

#include "sisynth/hashing.hpp"
#include "sisynth/mock_provider.hpp"

namespace sisynth {
namespace {

bool is_transient(int status) { return status == 408 || status == 429 || (status >= 500 && status <= 599); }

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kConfig, "endpoint '" + url + "' has no scheme");
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto [base, path] = split_url(request.url);
    httplib::Client client(base);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto result = client.Post(path, headers, request.body, "application/json");
    HttpResponse out;
    if (!result) {
      out.error = httplib::to_string(result.error());
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
  }
};

}  // namespace

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry) {
  const double seconds = std::min(policy.max_backoff_s, policy.base_backoff_s * std::pow(2.0, std::max(0, retry - 1)));
  return std::chrono::milliseconds(static_cast<long long>(std::llround(seconds * 1000.0)));
}

void ProviderProfile::validate() const {
  if (name.empty()) throw Error(ErrorCode::kConfig, "provider profile needs a name");
  if (kind == ProviderKind::kOpenAiCompatible && endpoint.empty()) {
    throw Error(ErrorCode::kConfig, "provider " + name + " has no endpoint");
  }
  if (!(temperature >= 0.0)) throw Error(ErrorCode::kConfig, "provider " + name + ": temperature must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorCode::kConfig, "provider " + name + ": max_tokens must be positive");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::kConfig, "provider " + name + ": timeout must be positive");
  if (retry.max_attempts < 1) throw Error(ErrorCode::kConfig, "provider " + name + ": max_attempts must be >= 1");
  if (retry.base_backoff_s < 0.0 || retry.max_backoff_s < 0.0) {
    throw Error(ErrorCode::kConfig, "provider " + name + ": backoff must be >= 0");
  }
}

void to_json(nlohmann::json& j, const ProviderProfile& p) {
  j = nlohmann::json{{"name", p.name},
                     {"kind", p.kind == ProviderKind::kMock ? "mock" : "openai"},
                     {"endpoint", p.endpoint},
                     {"model_id", p.model_id},
                     {"auth_env_var", p.auth_env_var},
                     {"temperature", p.temperature},
                     {"max_tokens", p.max_tokens},
                     {"timeout_s", p.timeout_s},
                     {"retry",
                      {{"max_attempts", p.retry.max_attempts},
                       {"base_backoff_s", p.retry.base_backoff_s},
                       {"max_backoff_s", p.retry.max_backoff_s}}}};
  if (!p.fixtures_dir.empty()) j["fixtures_dir"] = p.fixtures_dir;
}

void from_json(const nlohmann::json& j, ProviderProfile& p) {
  p.name = j.at("name").get<std::string>();
  const auto kind = j.value("kind", std::string("openai"));
  if (kind == "mock") {
    p.kind = ProviderKind::kMock;
  } else if (kind == "openai" || kind == "openai_compatible") {
    p.kind = ProviderKind::kOpenAiCompatible;
  } else {
    throw Error(ErrorCode::kConfig, "unknown provider kind '" + kind + "'");
  }
  p.endpoint = j.value("endpoint", std::string{});
  p.model_id = j.value("model_id", std::string{});
  p.auth_env_var = j.value("auth_env_var", std::string{});
  p.temperature = j.value("temperature", 1.0);
  p.max_tokens = j.value("max_tokens", 2048);
  p.timeout_s = j.value("timeout_s", 60.0);
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    p.retry.max_attempts = r.value("max_attempts", p.retry.max_attempts);
    p.retry.base_backoff_s = r.value("base_backoff_s", p.retry.base_backoff_s);
    p.retry.max_backoff_s = r.value("max_backoff_s", p.retry.max_backoff_s);
  }
  p.fixtures_dir = j.value("fixtures_dir", std::string{});
  for (const char* key : {"api_key", "apikey", "secret", "token", "password", "authorization"}) {
    if (!j.contains(key)) continue;
    throw Error(ErrorCode::kConfig, "provider " + p.name + ": secrets must come from the environment (auth_env_var)");
  }
}

ProviderProfile mock_profile(std::string name, std::string model_id) {
  ProviderProfile p;
  p.name = std::move(name);
  p.kind = ProviderKind::kMock;
  p.endpoint = "mock://local";
  p.model_id = std::move(model_id);
  p.retry.base_backoff_s = 0.0;
  return p;
}

void to_json(nlohmann::json& j, const RawCompletion& c) {
  j = nlohmann::json{{"job_id", c.job_id},
                     {"request_index", c.request_index},
                     {"provider", c.provider},
                     {"prompt_hash", c.prompt_hash},
                     {"response_text", c.response_text},
                     {"http_status", c.http_status},
                     {"attempts", c.attempts},
                     {"started_at", c.started_at},
                     {"finished_at", c.finished_at}};
  if (c.token_usage) {
    j["token_usage"] = {{"prompt_tokens", c.token_usage->prompt_tokens},
                        {"completion_tokens", c.token_usage->completion_tokens},
                        {"total_tokens", c.token_usage->total_tokens}};
  }
}

void from_json(const nlohmann::json& j, RawCompletion& c) {
  c.job_id = j.at("job_id").get<std::string>();
  c.request_index = j.at("request_index").get<std::size_t>();
  c.provider = j.value("provider", std::string{});
  c.prompt_hash = j.value("prompt_hash", std::string{});
  c.response_text = j.at("response_text").get<std::string>();
  c.http_status = j.value("http_status", 0);
  c.attempts = j.value("attempts", 0);
  c.started_at = j.value("started_at", std::string{});
  c.finished_at = j.value("finished_at", std::string{});
  if (j.contains("token_usage")) {
    const auto& u = j["token_usage"];
    c.token_usage = TokenUsage{u.value("prompt_tokens", 0LL), u.value("completion_tokens", 0LL),
                               u.value("total_tokens", 0LL)};
  }
}

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

std::string build_chat_request(const ProviderProfile& profile, std::string_view prompt,
                               std::optional<std::uint64_t> seed) {
  nlohmann::json body = {{"model", profile.model_id},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                         {"temperature", profile.temperature},
                         {"max_tokens", profile.max_tokens}};
  if (seed) body["seed"] = *seed & 0x7fffffffULL;
  return body.dump();
}

ChatEnvelope parse_chat_response(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kProtocol, std::string("provider response is not JSON: ") + e.what());
  }
  const auto fail = [](const std::string& what) { return Error(ErrorCode::kProtocol, "malformed provider envelope: " + what); };
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw fail("missing choices[0]");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw fail("missing choices[0].message");
  }
  const auto& message = choice["message"];
  if (!message.contains("content") || !message["content"].is_string()) {
    throw fail("choices[0].message.content is not a string");
  }
  ChatEnvelope env;
  env.content = message["content"].get<std::string>();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    const auto& u = doc["usage"];
    env.usage = TokenUsage{u.value("prompt_tokens", 0LL), u.value("completion_tokens", 0LL),
                           u.value("total_tokens", 0LL)};
  }
  return env;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
  return buf;
}

ChatClient::ChatClient(ProviderProfile profile, std::shared_ptr<HttpTransport> transport)
    : profile_(std::move(profile)),
      transport_(std::move(transport)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      clock_(&utc_timestamp) {
  profile_.validate();
  if (!transport_) {
    if (profile_.kind == ProviderKind::kMock) {
      transport_ = std::make_shared<MockProvider>(profile_.fixtures_dir);
    } else {
      transport_ = make_http_transport();
    }
  }
}

RawCompletion ChatClient::complete(std::string_view prompt, std::optional<std::uint64_t> seed) const {
  HttpRequest request;
  request.url = profile_.endpoint;
  request.body = build_chat_request(profile_, prompt, seed);
  request.timeout = std::chrono::milliseconds(static_cast<long long>(profile_.timeout_s * 1000.0));
  if (!profile_.auth_env_var.empty()) {
    const char* secret = std::getenv(profile_.auth_env_var.c_str());
    if (secret == nullptr || *secret == '\0') {
      throw ProviderError(ErrorCode::kAuth,
                          "provider " + profile_.name + ": environment variable " + profile_.auth_env_var + " is not set",
                          0, 0);
    }
    request.headers.emplace_back("Authorization", std::string("Bearer ") + secret);
  }

  RawCompletion out;
  out.provider = profile_.name;
  out.prompt_hash = sha256_hex(prompt);
  out.started_at = clock_();

  int last_status = 0;
  std::string last_error;
  for (int attempt = 1; attempt <= profile_.retry.max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(backoff_delay(profile_.retry, attempt - 1));
    const HttpResponse response = transport_->post(request);
    last_status = response.status;
    if (!response.error.empty()) {
      last_error = response.error;
      continue;
    }
    if (response.status == 401 || response.status == 403) {
      throw ProviderError(ErrorCode::kAuth,
                          "provider " + profile_.name + " rejected credentials (HTTP " + std::to_string(response.status) + ")",
                          response.status, attempt);
    }
    if (is_transient(response.status)) {
      last_error = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      throw ProviderError(ErrorCode::kTransport,
                          "provider " + profile_.name + " returned HTTP " + std::to_string(response.status),
                          response.status, attempt);
    }
    ChatEnvelope env;
    try {
      env = parse_chat_response(response.body);
    } catch (const Error& e) {
      throw ProviderError(ErrorCode::kProtocol, e.what(), response.status, attempt);
    }
    out.response_text = std::move(env.content);
    out.token_usage = env.usage;
    out.http_status = response.status;
    out.attempts = attempt;
    out.finished_at = clock_();
    return out;
  }
  throw ProviderError(ErrorCode::kTransport,
                      "provider " + profile_.name + ": retries exhausted after " +
                          std::to_string(profile_.retry.max_attempts) + " attempts (" + last_error + ")",
                      last_status, profile_.retry.max_attempts);
}

RawCompletion complete(const ProviderProfile& profile, std::string_view prompt) {
  return ChatClient(profile).complete(prompt);
}

}  // namespace sisynth
