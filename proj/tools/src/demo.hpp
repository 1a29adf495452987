#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"
#include "sisynth/eval.hpp"

namespace sisynth::cli {

/// Stand-in for a user-labeled forum corpus: four-class labels assigned per
/// user, one to four posts per user, a little label noise. Deterministic in
/// the seed.
Dataset make_demo_real_corpus(std::size_t users, std::uint64_t seed);

struct DemoOptions {
  std::filesystem::path out_dir = "demo-out";
  std::uint64_t seed = 7;
  std::size_t requests = 8;  // per provider
  std::size_t real_users = 320;
  std::size_t concurrency = 4;
  bool sweep = true;
};

struct DemoResult {
  EvalMatrix matrix;
  std::filesystem::path matrix_csv;
  nlohmann::json report;
};

/// generate -> parse -> holdout/split -> train -> eval -> (sweep) -> report,
/// entirely on mock providers.
DemoResult run_demo(const DemoOptions& options, std::ostream& log);

}  // namespace sisynth::cli
