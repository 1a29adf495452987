#include "sisynth/export.hpp"

#include <fstream>

#include "sisynth/error.hpp"

namespace sisynth {
namespace {

void write_split(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kExport, "cannot write " + path.string());
  for (const auto& r : d.records()) {
    nlohmann::json line = {{"id", r.id}, {"text", r.text}, {"label", label_name(r.label)}};
    out << line.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kExport, "failed writing " + path.string());
}

Dataset read_split(const std::filesystem::path& path, SchemaKind schema, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kExport, "cannot read " + path.string());
  std::vector<TextRecord> records;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TextRecord r;
      r.id = j.at("id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.label = parse_label(j.at("label").get<std::string>());
      r.source = RealSource{"export"};
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kExport, path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return Dataset(std::move(name), schema, std::move(records));
}

}  // namespace

nlohmann::json to_json(const FinetuneConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"dropout", c.dropout},
          {"max_sequence_length", c.max_sequence_length}};
}

ExportBundle export_for_finetune(const Dataset& train, const Dataset& val, const std::filesystem::path& out_dir,
                                 const FinetuneConfig& config) {
  if (train.schema() != val.schema()) {
    throw Error(ErrorCode::kExport, "train set " + train.name() + " is " + std::string(to_string(train.schema())) +
                                        " but val set " + val.name() + " is " + std::string(to_string(val.schema())));
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kExport, "cannot create " + out_dir.string() + ": " + ec.message());

  ExportBundle bundle{out_dir / "train.jsonl", out_dir / "val.jsonl", out_dir / "finetune_config.json"};
  write_split(train, bundle.train_file);
  write_split(val, bundle.val_file);

  nlohmann::json cfg = to_json(config);
  cfg["schema"] = to_string(train.schema());
  nlohmann::json labels = nlohmann::json::array();
  for (Label l : LabelSchema::of(train.schema()).labels()) labels.push_back(label_name(l));
  cfg["labels"] = labels;
  cfg["train"] = {{"name", train.name()}, {"records", train.size()}, {"content_hash", train.content_hash()}};
  cfg["val"] = {{"name", val.name()}, {"records", val.size()}, {"content_hash", val.content_hash()}};
  std::ofstream out(bundle.config_file);
  out << cfg.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kExport, "failed writing " + bundle.config_file.string());
  return bundle;
}

ImportedBundle import_finetune_bundle(const std::filesystem::path& dir) {
  std::ifstream in(dir / "finetune_config.json");
  if (!in) throw Error(ErrorCode::kExport, "no finetune_config.json in " + dir.string());
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kExport, std::string("malformed finetune_config.json: ") + e.what());
  }
  const auto schema = parse_schema_kind(cfg.at("schema").get<std::string>());
  auto train = read_split(dir / "train.jsonl", schema, cfg["train"].value("name", std::string("train")));
  auto val = read_split(dir / "val.jsonl", schema, cfg["val"].value("name", std::string("val")));
  return {std::move(train), std::move(val), std::move(cfg)};
}

}  // namespace sisynth
