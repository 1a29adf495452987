#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/taxonomy.hpp"

namespace sisynth {

enum class ShotMode : std::uint8_t { kZeroShot, kFewShot };
std::string_view to_string(ShotMode mode);
ShotMode parse_shot_mode(std::string_view s);

struct SyntheticSource {
  std::string provider;
  ShotMode shot_mode = ShotMode::kZeroShot;
  bool topic_oriented = false;
  friend bool operator==(const SyntheticSource&, const SyntheticSource&) = default;
};

struct RealSource {
  std::string corpus;
  friend bool operator==(const RealSource&, const RealSource&) = default;
};

struct MixedSource {
  std::vector<std::string> lineage;
  friend bool operator==(const MixedSource&, const MixedSource&) = default;
};

using RecordSource = std::variant<SyntheticSource, RealSource, MixedSource>;

/// Short provenance string folded into record ids, e.g. "synthetic:gpt".
std::string source_tag(const RecordSource& source);

enum class SplitName : std::uint8_t { kTrain, kTest, kVal };
std::string_view to_string(SplitName split);
SplitName parse_split_name(std::string_view s);

struct TextRecord {
  std::string id;
  std::string text;
  Label label = Label::kNonSuicidal;
  std::optional<std::string> topic;
  std::optional<std::string> user_id;
  RecordSource source;
  std::optional<SplitName> split;

  friend bool operator==(const TextRecord&, const TextRecord&) = default;
};

/// Content-derived record id: hash of the whitespace-normalized text and the
/// source tag, truncated to 32 hex characters.
std::string record_id(std::string_view text, const RecordSource& source);

void to_json(nlohmann::json& j, const TextRecord& record);
void from_json(const nlohmann::json& j, TextRecord& record);
void to_json(nlohmann::json& j, const RecordSource& source);
void from_json(const nlohmann::json& j, RecordSource& source);

/// An immutable, schema-tagged collection of records with unique ids.
class Dataset {
 public:
  Dataset() = default;
  /// Throws kComposition for duplicate ids and kInvalidLabel for labels
  /// outside the schema.
  Dataset(std::string name, SchemaKind schema, std::vector<TextRecord> records,
          nlohmann::json creation_parameters = nlohmann::json::object());

  const std::string& name() const { return name_; }
  SchemaKind schema() const { return schema_; }
  const std::vector<TextRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const nlohmann::json& creation_parameters() const { return creation_parameters_; }

  const TextRecord* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::set<std::string> ids() const;
  /// True when every record carries a user id (vacuously false when empty).
  bool has_user_ids() const;

  /// SHA-256 over the sorted record ids, newline-joined.
  std::string content_hash() const;

  Dataset with_name(std::string name) const;

 private:
  std::string name_;
  SchemaKind schema_ = SchemaKind::kBinary;
  std::vector<TextRecord> records_;
  nlohmann::json creation_parameters_ = nlohmann::json::object();
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct ClassStats {
  Label label;
  std::size_t count = 0;
  double percent = 0.0;
  std::size_t users = 0;
};

struct DatasetManifest {
  std::string name;
  SchemaKind schema = SchemaKind::kBinary;
  std::size_t record_count = 0;
  std::size_t user_count = 0;
  std::vector<ClassStats> class_distribution;  // schema order
  std::map<std::string, std::size_t> topic_distribution;
  nlohmann::json creation_parameters;
  std::string content_hash;

  const ClassStats& stats(Label label) const;
};

/// Key used in topic_distribution for records without a topic.
inline constexpr std::string_view kNoTopicKey = "(none)";

DatasetManifest compute_manifest(const Dataset& dataset);
nlohmann::json to_json(const DatasetManifest& manifest);

struct IngestResult {
  Dataset dataset;
  DatasetManifest manifest;
  std::size_t duplicates_removed = 0;
};

/// Reads normalized JSONL ({text, label, user_id?, topic?} per line).
/// Texts are whitespace-normalized; exact duplicates after normalization are
/// collapsed, first occurrence wins.
IngestResult normalize_ingest(const std::filesystem::path& path, const RecordSource& source,
                              SchemaKind schema, std::string name = {});
IngestResult normalize_ingest(std::istream& in, const RecordSource& source, SchemaKind schema,
                              std::string name);

/// Maps every label through binarize(). Ids, users, topics and splits
/// are preserved.
Dataset binarize_dataset(const Dataset& dataset);

struct HoldoutResult {
  Dataset pool;
  std::vector<Dataset> remainders;
};

/// Draws a label-stratified round(fraction * N) sample from each dataset into
/// one pool.
HoldoutResult holdout_synthetic_test(std::span<const Dataset> datasets, double fraction,
                                     std::uint64_t seed, std::string pool_name = "synthetic-test");

/// Concatenates datasets that share a schema and have disjoint ids. Records
/// keep their own provenance; the lineage is recorded in the creation
/// parameters.
Dataset compose_mix(std::span<const Dataset> datasets, std::string name);

/// Paths of the JSONL records file and its sidecar manifest.
std::filesystem::path manifest_path_for(const std::filesystem::path& records_path);

/// Writes records JSONL plus sidecar manifest. Refuses to overwrite unless
/// overwrite is set.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path, bool overwrite = false);
/// Reads records JSONL; name, schema and creation parameters come from the
/// sidecar manifest when present, otherwise from the file stem and labels.
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace sisynth
