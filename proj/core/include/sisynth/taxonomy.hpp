#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sisynth {

enum class SchemaKind : std::uint8_t { kBinary, kFourClass };

/// Risk level names across both schemas. Binary levels come first; within a
/// schema the enumerators are in ascending risk order.
enum class Label : std::uint8_t {
  kNonSuicidal,
  kSuicidal,
  kNoRisk,
  kLowRisk,
  kModerateRisk,
  kHighRisk,
};

std::string_view to_string(SchemaKind kind);
SchemaKind parse_schema_kind(std::string_view s);

/// Canonical identifier, e.g. "NonSuicidal", "ModerateRisk".
std::string_view label_name(Label label);
/// Prompt-facing name, e.g. "Non Suicidal", "Moderate Risk".
std::string_view label_display_name(Label label);
/// Exact match on the canonical or display name.
std::optional<Label> find_label(std::string_view name);
/// Like find_label, but throws kInvalidLabel.
Label parse_label(std::string_view name);
SchemaKind schema_of(Label label);

struct RiskLevel {
  SchemaKind schema_kind;
  Label name;
  std::string criterion;

  friend bool operator==(const RiskLevel&, const RiskLevel&) = default;
};

/// Ordered risk levels of one schema together with the criterion prose that
/// is shown to the generator.
class LabelSchema {
 public:
  static LabelSchema binary();
  static LabelSchema fourclass();
  static LabelSchema of(SchemaKind kind);

  /// Replaces criterion text for the given levels. Unknown levels or empty
  /// prose raise kInvalidLabel / kInvalidSpec.
  LabelSchema with_criteria(const std::map<Label, std::string>& criteria) const;

  SchemaKind kind() const { return kind_; }
  const std::vector<RiskLevel>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  Label at(std::size_t index) const { return levels_.at(index).name; }
  std::vector<Label> labels() const;
  bool contains(Label label) const;
  /// Position of the label in schema order; throws kInvalidLabel.
  std::size_t index_of(Label label) const;

  friend bool operator==(const LabelSchema&, const LabelSchema&) = default;

 private:
  LabelSchema(SchemaKind kind, std::vector<RiskLevel> levels)
      : kind_(kind), levels_(std::move(levels)) {}

  SchemaKind kind_;
  std::vector<RiskLevel> levels_;
};

/// NoRisk, LowRisk -> NonSuicidal; ModerateRisk, HighRisk -> Suicidal.
/// Binary labels are rejected with kInvalidLabel.
Label binarize(Label fourclass_level);

/// Sums a four-class distribution (counts, percent hundredths, ...) into the
/// binary one. Missing levels count as zero.
template <typename T>
std::map<Label, T> binarize_distribution(const std::map<Label, T>& fourclass) {
  std::map<Label, T> out{{Label::kNonSuicidal, T{}}, {Label::kSuicidal, T{}}};
  for (const auto& [label, value] : fourclass) out[binarize(label)] += value;
  return out;
}

/// The criteria block embedded in generation prompts: a header sentence and
/// one "Risk Level=<name>: <criterion>" line per level. Byte-stable.
std::string render_criteria(const LabelSchema& schema);

/// Reads a JSON object mapping level names to criterion prose.
std::map<Label, std::string> load_criteria_file(const std::filesystem::path& path);

struct Topic {
  std::string id;
  std::string display_name;
  std::string description;
  std::vector<std::string> citation_keys;

  friend bool operator==(const Topic&, const Topic&) = default;
};

void to_json(nlohmann::json& j, const Topic& topic);
void from_json(const nlohmann::json& j, Topic& topic);

class TopicRegistry {
 public:
  TopicRegistry() = default;
  /// Validates ids (lowercase slug, unique) and nonempty display names.
  explicit TopicRegistry(std::vector<Topic> topics);

  static TopicRegistry from_json(const nlohmann::json& array);
  static TopicRegistry load(const std::filesystem::path& path);

  const std::vector<Topic>& topics() const { return topics_; }
  std::size_t size() const { return topics_.size(); }
  bool empty() const { return topics_.empty(); }

  /// Lookup by id or display name, ignoring case, spaces, hyphens and
  /// underscores.
  const Topic* find(std::string_view key) const;

 private:
  std::vector<Topic> topics_;
};

/// The bundled registry of 14 social and psychological factors.
const TopicRegistry& default_registry();
std::vector<Topic> default_topics();

}  // namespace sisynth
