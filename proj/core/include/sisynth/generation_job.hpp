#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/llm_gateway.hpp"

namespace sisynth {

/// A persisted batch of identical generation requests. The job directory
/// holds job.json (written before the first request), prompt.txt and the
/// append-only completions.jsonl.
struct GenerationJob {
  std::string job_id;
  nlohmann::json prompt_spec;
  std::string prompt;
  std::string prompt_hash;
  std::string provider;
  std::size_t request_count = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

/// Builds a job whose id is derived from the prompt hash, provider and seed.
GenerationJob make_job(nlohmann::json prompt_spec, std::string prompt, std::string provider,
                       std::size_t request_count, std::uint64_t seed, std::filesystem::path output_dir);

nlohmann::json to_json(const GenerationJob& job);
GenerationJob load_job(const std::filesystem::path& job_dir);

/// Persisted completions sorted by request index. A torn final line (from a
/// crash mid-write) is dropped and truncated away.
std::vector<RawCompletion> load_completions(const std::filesystem::path& job_dir);

struct JobOptions {
  std::size_t concurrency = 4;
  /// Stop after this many new requests; used to run a job in portions.
  std::optional<std::size_t> request_budget;
};

struct JobResult {
  std::vector<RawCompletion> completions;  // everything persisted, by index
  std::vector<std::size_t> requested;      // indices requested in this run
};

/// Per-request provider seed.
std::uint64_t request_seed(std::uint64_t job_seed, std::size_t request_index);

/// Requests every index not yet persisted, with at most `concurrency`
/// requests in flight. A fatal provider error stops dispatch, lets in-flight
/// requests finish and is rethrown; completed indices stay on disk.
JobResult run_job(const GenerationJob& job, const ChatClient& client, const JobOptions& options = {});

}  // namespace sisynth
