#include "pipeline_config.hpp"

#include <fstream>

#include "sisynth/error.hpp"

namespace sisynth::cli {
namespace {

SplitSpec split_from_json(const nlohmann::json& j) {
  SplitSpec s;
  s.train = j.value("train", s.train);
  s.test = j.value("test", s.test);
  s.val = j.value("val", s.val);
  s.seed = j.value("seed", s.seed);
  if (auto it = j.find("unit"); it != j.end()) s.unit = parse_split_unit(it->get<std::string>());
  s.stratify_by_label = j.value("stratify_by_label", s.stratify_by_label);
  return s;
}

nlohmann::json split_to_json(const SplitSpec& s) {
  return {{"train", s.train}, {"test", s.test},           {"val", s.val},
          {"seed", s.seed},   {"unit", to_string(s.unit)}, {"stratify_by_label", s.stratify_by_label}};
}

}  // namespace

const ProviderProfile& PipelineConfig::provider(const std::string& name) const {
  if (!name.empty()) {
    for (const auto& p : providers) {
      if (p.profile.name == name) return p.profile;
    }
    throw Error(ErrorCode::kConfig, "no provider named " + name);
  }
  const ProviderProfile* active = nullptr;
  for (const auto& p : providers) {
    if (!p.active) continue;
    if (active) throw Error(ErrorCode::kConfig, "more than one provider is marked active");
    active = &p.profile;
  }
  if (!active) throw Error(ErrorCode::kConfig, "no provider is marked active");
  return *active;
}

void PipelineConfig::check_paths() const {
  for (const auto& [name, path] : datasets) {
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kConfig, "dataset " + name + " not found at " + path.string());
    }
  }
}

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  PipelineConfig c;
  try {
    for (const auto& p : j.value("providers", nlohmann::json::array())) {
      ProviderEntry e;
      e.profile = p.get<ProviderProfile>();
      e.profile.validate();
      e.active = p.value("active", false);
      if (!e.profile.fixtures_dir.empty()) e.profile.fixtures_dir = resolve(e.profile.fixtures_dir).string();
      c.providers.push_back(std::move(e));
    }
    c.prompt_spec = j.value("prompt_spec", nlohmann::json::object());
    for (const auto& [name, path] : j.value("datasets", nlohmann::json::object()).items()) {
      c.datasets[name] = resolve(path.get<std::string>());
    }
    if (auto it = j.find("split"); it != j.end()) c.split = split_from_json(*it);
    if (auto it = j.find("augmentation"); it != j.end()) c.augmentation = augmentation_plan_from_json(*it);
    if (auto it = j.find("trainer"); it != j.end()) c.trainer = train_config_from_json(*it);
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
    c.requests = j.value("requests", c.requests);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json providers = nlohmann::json::array();
  for (const auto& p : c.providers) {
    nlohmann::json e = p.profile;
    e["active"] = p.active;
    providers.push_back(std::move(e));
  }
  nlohmann::json datasets = nlohmann::json::object();
  for (const auto& [name, path] : c.datasets) datasets[name] = path.string();
  return {{"providers", providers},
          {"prompt_spec", c.prompt_spec},
          {"datasets", datasets},
          {"split", split_to_json(c.split)},
          {"augmentation", to_json(c.augmentation)},
          {"trainer", to_json(c.trainer)},
          {"output_dir", c.output_dir.string()},
          {"requests", c.requests},
          {"seed", c.seed}};
}

}  // namespace sisynth::cli
