#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"

namespace sisynth {

/// Hyperparameters handed to an external encoder fine-tuning run.
struct FinetuneConfig {
  double learning_rate = 2e-5;
  std::size_t batch_size = 4;
  double dropout = 0.1;
  std::size_t max_sequence_length = 512;
};

nlohmann::json to_json(const FinetuneConfig& c);

struct ExportBundle {
  std::filesystem::path train_file;
  std::filesystem::path val_file;
  std::filesystem::path config_file;
};

/// Writes train.jsonl, val.jsonl ({id, text, label} per line) and
/// finetune_config.json into `out_dir`. Throws kExport when the schemas differ.
ExportBundle export_for_finetune(const Dataset& train, const Dataset& val, const std::filesystem::path& out_dir,
                                 const FinetuneConfig& config = {});

struct ImportedBundle {
  Dataset train;
  Dataset val;
  nlohmann::json config;
};

ImportedBundle import_finetune_bundle(const std::filesystem::path& dir);

}  // namespace sisynth
