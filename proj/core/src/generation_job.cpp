#include "sisynth/generation_job.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "sisynth/hashing.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

constexpr const char* kJobFile = "job.json";
constexpr const char* kPromptFile = "prompt.txt";
constexpr const char* kCompletionsFile = "completions.jsonl";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
}

void write_or_verify_manifest(const GenerationJob& job) {
  std::filesystem::create_directories(job.output_dir);
  const auto path = job.output_dir / kJobFile;
  if (std::filesystem::exists(path)) {
    const GenerationJob existing = load_job(job.output_dir);
    if (existing.job_id != job.job_id || existing.prompt_hash != job.prompt_hash ||
        existing.request_count != job.request_count || existing.provider != job.provider) {
      throw Error(ErrorCode::kConfig, "job directory " + job.output_dir.string() + " belongs to job " +
                                          existing.job_id + " with different parameters");
    }
    return;
  }
  write_file(job.output_dir / kPromptFile, job.prompt);
  write_file(path, to_json(job).dump(2) + "\n");
}

}  // namespace

GenerationJob make_job(nlohmann::json prompt_spec, std::string prompt, std::string provider,
                       std::size_t request_count, std::uint64_t seed, std::filesystem::path output_dir) {
  if (request_count == 0) throw Error(ErrorCode::kConfig, "request_count must be positive");
  GenerationJob job;
  job.prompt_hash = sha256_hex(prompt);
  job.job_id = sha256_hex(job.prompt_hash + "|" + provider + "|" + std::to_string(seed)).substr(0, 16);
  job.prompt_spec = std::move(prompt_spec);
  job.prompt = std::move(prompt);
  job.provider = std::move(provider);
  job.request_count = request_count;
  job.seed = seed;
  job.output_dir = std::move(output_dir);
  return job;
}

nlohmann::json to_json(const GenerationJob& job) {
  return {{"job_id", job.job_id},
          {"prompt_spec", job.prompt_spec},
          {"prompt_hash", job.prompt_hash},
          {"provider", job.provider},
          {"request_count", job.request_count},
          {"seed", job.seed},
          {"output_path", (job.output_dir / kCompletionsFile).string()}};
}

GenerationJob load_job(const std::filesystem::path& job_dir) {
  GenerationJob job;
  try {
    const auto j = nlohmann::json::parse(read_file(job_dir / kJobFile));
    job.job_id = j.at("job_id").get<std::string>();
    job.prompt_spec = j.value("prompt_spec", nlohmann::json::object());
    job.prompt_hash = j.at("prompt_hash").get<std::string>();
    job.provider = j.at("provider").get<std::string>();
    job.request_count = j.at("request_count").get<std::size_t>();
    job.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "job manifest " + (job_dir / kJobFile).string() + ": " + e.what());
  }
  job.prompt = read_file(job_dir / kPromptFile);
  job.output_dir = job_dir;
  if (sha256_hex(job.prompt) != job.prompt_hash) {
    throw Error(ErrorCode::kConfig, "prompt.txt in " + job_dir.string() + " does not match the job's prompt hash");
  }
  return job;
}

std::vector<RawCompletion> load_completions(const std::filesystem::path& job_dir) {
  const auto path = job_dir / kCompletionsFile;
  if (!std::filesystem::exists(path)) return {};
  std::string content = read_file(path);
  if (!content.empty() && content.back() != '\n') {
    const auto last_newline = content.find_last_of('\n');
    const std::size_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
    content.resize(keep);
    std::filesystem::resize_file(path, keep);
  }
  std::map<std::size_t, RawCompletion> by_index;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto end = content.find('\n', pos);
    const std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    if (trim(line).empty()) continue;
    try {
      auto c = nlohmann::json::parse(line).get<RawCompletion>();
      by_index.emplace(c.request_index, std::move(c));
    } catch (const nlohmann::json::exception&) {
      // An unreadable line is treated as a missing completion and re-requested.
    }
  }
  std::vector<RawCompletion> out;
  out.reserve(by_index.size());
  for (auto& [_, c] : by_index) out.push_back(std::move(c));
  return out;
}

std::uint64_t request_seed(std::uint64_t job_seed, std::size_t request_index) {
  return mix_seed(job_seed, static_cast<std::uint64_t>(request_index)) & 0x7fffffffULL;
}

JobResult run_job(const GenerationJob& job, const ChatClient& client, const JobOptions& options) {
  if (options.concurrency == 0) throw Error(ErrorCode::kConfig, "concurrency must be at least 1");
  write_or_verify_manifest(job);

  std::vector<RawCompletion> persisted = load_completions(job.output_dir);
  std::set<std::size_t> done;
  for (const auto& c : persisted) done.insert(c.request_index);

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < job.request_count; ++i) {
    if (!done.contains(i)) pending.push_back(i);
  }
  if (options.request_budget && pending.size() > *options.request_budget) pending.resize(*options.request_budget);

  std::ofstream out(job.output_dir / kCompletionsFile, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to completions in " + job.output_dir.string());

  std::mutex write_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::vector<std::size_t> requested;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t index = pending[slot];
      {
        std::lock_guard lock(write_mutex);
        requested.push_back(index);
      }
      try {
        RawCompletion c = client.complete(job.prompt, request_seed(job.seed, index));
        c.job_id = job.job_id;
        c.request_index = index;
        std::lock_guard lock(write_mutex);
        out << nlohmann::json(c).dump() << '\n';
        out.flush();
      } catch (...) {
        std::lock_guard lock(write_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };

  const std::size_t threads = std::min(options.concurrency, pending.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  out.close();
  if (failure) std::rethrow_exception(failure);

  JobResult result;
  result.completions = load_completions(job.output_dir);
  std::sort(requested.begin(), requested.end());
  result.requested = std::move(requested);
  return result;
}

}  // namespace sisynth
