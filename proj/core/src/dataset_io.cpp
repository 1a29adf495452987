#include <fstream>
#include <set>
#include <sstream>

#include "sisynth/dataset.hpp"
#include "sisynth/error.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return it->dump();
}

void write_text_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

IngestResult normalize_ingest(std::istream& in, const RecordSource& source, SchemaKind schema,
                              std::string name) {
  std::vector<TextRecord> records;
  std::set<std::string> seen_texts;
  std::size_t removed = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kIngest, where + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw Error(ErrorCode::kIngest, where + ": expected a JSON object");
    if (!obj.contains("text") || !obj["text"].is_string()) {
      throw Error(ErrorCode::kIngest, where + ": missing string field 'text'");
    }
    if (!obj.contains("label") || !obj["label"].is_string()) {
      throw Error(ErrorCode::kIngest, where + ": missing string field 'label'");
    }
    const std::string raw_label = obj["label"].get<std::string>();
    const auto label = find_label(raw_label);
    if (!label || schema_of(*label) != schema) {
      throw Error(ErrorCode::kIngest, where + ": unknown " + std::string(to_string(schema)) +
                                          " label '" + raw_label + "'");
    }
    std::string text = normalize_whitespace(obj["text"].get<std::string>());
    if (text.empty()) throw Error(ErrorCode::kIngest, where + ": empty text");
    if (!seen_texts.insert(text).second) {
      ++removed;
      continue;
    }
    TextRecord r;
    r.id = record_id(text, source);
    r.text = std::move(text);
    r.label = *label;
    r.topic = optional_string(obj, "topic");
    r.user_id = optional_string(obj, "user_id");
    r.source = source;
    records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "no records in input " + name);

  nlohmann::json params = {{"op", "ingest"},
                           {"source", source},
                           {"duplicates_removed", removed},
                           {"lines", line_no}};
  IngestResult result{Dataset(std::move(name), schema, std::move(records), std::move(params)), {}, removed};
  result.manifest = compute_manifest(result.dataset);
  return result;
}

IngestResult normalize_ingest(const std::filesystem::path& path, const RecordSource& source,
                              SchemaKind schema, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (name.empty()) name = path.stem().string();
  return normalize_ingest(in, source, schema, std::move(name));
}

std::filesystem::path manifest_path_for(const std::filesystem::path& records_path) {
  auto p = records_path;
  if (p.extension() == ".jsonl") p.replace_extension();
  p += ".manifest.json";
  return p;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path, bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "refusing to overwrite existing dataset " + path.string());
  }
  std::string body;
  for (const auto& r : dataset.records()) {
    body += nlohmann::json(r).dump();
    body += '\n';
  }
  write_text_atomically(path, body);
  write_text_atomically(manifest_path_for(path), to_json(compute_manifest(dataset)).dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path.string());
  std::vector<TextRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<TextRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInput, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::string name = path.stem().string();
  std::optional<SchemaKind> schema;
  nlohmann::json params = nlohmann::json::object();
  const auto manifest = manifest_path_for(path);
  if (std::filesystem::exists(manifest)) {
    std::ifstream min(manifest);
    try {
      const auto m = nlohmann::json::parse(min);
      name = m.value("name", name);
      schema = parse_schema_kind(m.at("schema").get<std::string>());
      params = m.value("creation_parameters", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInput, "manifest " + manifest.string() + ": " + e.what());
    }
  } else if (!records.empty()) {
    schema = schema_of(records.front().label);
  } else {
    throw Error(ErrorCode::kEmptyDataset, "empty dataset without manifest: " + path.string());
  }
  return Dataset(std::move(name), *schema, std::move(records), std::move(params));
}

}  // namespace sisynth
