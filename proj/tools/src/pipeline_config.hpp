#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/augmenter.hpp"
#include "sisynth/linear_model.hpp"
#include "sisynth/llm_gateway.hpp"
#include "sisynth/split.hpp"

namespace sisynth::cli {

struct ProviderEntry {
  ProviderProfile profile;
  bool active = false;
};

/// Whole-experiment settings. Relative paths resolve against the config
/// file's directory.
struct PipelineConfig {
  std::vector<ProviderEntry> providers;
  nlohmann::json prompt_spec = nlohmann::json::object();
  std::map<std::string, std::filesystem::path> datasets;
  SplitSpec split;
  AugmentationPlan augmentation;
  TrainConfig trainer;
  std::filesystem::path output_dir = "out";
  std::size_t requests = 10;
  std::uint64_t seed = 0;

  /// The provider named `name`, or the single active one when empty.
  /// Throws kConfig when that is ambiguous or missing.
  const ProviderProfile& provider(const std::string& name = {}) const;
  /// Throws kConfig for dataset paths that do not exist.
  void check_paths() const;
};

/// Rejects secret values: a profile may only name its environment variable.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const PipelineConfig& c);

}  // namespace sisynth::cli
