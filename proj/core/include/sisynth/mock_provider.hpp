#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "sisynth/llm_gateway.hpp"

namespace sisynth {

/// Offline provider speaking the OpenAI-compatible chat shape. A response is
/// looked up by prompt hash among registered fixtures (in memory, or
/// <hash>.txt in the fixtures directory); without a fixture the content is
/// synthesized deterministically from the prompt, model id and request seed.
class MockProvider final : public HttpTransport {
 public:
  explicit MockProvider(std::filesystem::path fixtures_dir = {});

  void add_fixture(const std::string& prompt_hash, std::string content);
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::filesystem::path fixtures_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> fixtures_;
};

/// Generates a plausible model answer for a generation prompt: one record
/// per topic and risk level in topic mode, the requested count otherwise.
/// Output formatting and label spelling vary with the seed the way real
/// providers drift (fenced blocks, prose wrappers, alternate keys).
std::string synthesize_mock_response(std::string_view prompt, std::string_view model_id, std::uint64_t seed);

}  // namespace sisynth
