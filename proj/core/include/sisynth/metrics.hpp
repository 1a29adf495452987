#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/taxonomy.hpp"

namespace sisynth {

/// Rows are gold labels, columns predictions, both in schema order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(SchemaKind schema);

  void add(Label gold, Label predicted);
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * classes_ + predicted]; }
  std::size_t classes() const { return classes_; }
  std::size_t total() const { return total_; }
  std::size_t trace() const;
  SchemaKind schema() const { return schema_; }

 private:
  SchemaKind schema_;
  std::size_t classes_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  Label label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

enum class F1Variant : std::uint8_t { kPositive, kMacro, kWeighted };
std::string_view to_string(F1Variant v);
F1Variant parse_f1_variant(std::string_view s);

struct MetricsReport {
  SchemaKind schema = SchemaKind::kBinary;
  std::size_t samples = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;  // schema order
  /// F1 of Suicidal; binary schemas only.
  std::optional<double> positive_f1;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;

  /// Positive-class F1 falls back to macro F1 on four-class schemas.
  double f1(F1Variant variant) const;
  const ClassMetrics& of(Label label) const;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); every ratio is 0 when
/// its denominator is 0. Throws kInput on empty or unequal-length input and
/// kInvalidLabel for labels outside the schema.
MetricsReport compute_metrics(std::span<const Label> predictions, std::span<const Label> golds,
                              SchemaKind schema);
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

/// Recounts every metric directly from the label vectors and compares with
/// compute_metrics for exact equality.
bool verify_against_reference(std::span<const Label> predictions, std::span<const Label> golds,
                              SchemaKind schema);

}  // namespace sisynth
