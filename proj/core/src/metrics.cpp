#include "sisynth/metrics.hpp"

#include "sisynth/error.hpp"
#include "sisynth/trainer.hpp"

namespace sisynth {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_score(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void check_inputs(std::span<const Label> predictions, std::span<const Label> golds, const LabelSchema& schema) {
  if (predictions.empty()) throw Error(ErrorCode::kInput, "no predictions to score");
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCode::kInput, "prediction and gold lengths differ: " + std::to_string(predictions.size()) +
                                       " vs " + std::to_string(golds.size()));
  }
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!schema.contains(golds[i]) || !schema.contains(predictions[i])) {
      throw Error(ErrorCode::kInvalidLabel, "label outside schema " + std::string(to_string(schema.kind())) +
                                                " at position " + std::to_string(i));
    }
  }
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(SchemaKind schema)
    : schema_(schema), classes_(LabelSchema::of(schema).size()), counts_(classes_ * classes_, 0) {}

void ConfusionMatrix::add(Label gold, Label predicted) {
  const auto& s = LabelSchema::of(schema_);
  ++counts_[s.index_of(gold) * classes_ + s.index_of(predicted)];
  ++total_;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < classes_; ++i) t += at(i, i);
  return t;
}

std::string_view to_string(F1Variant v) {
  switch (v) {
    case F1Variant::kPositive: return "positive";
    case F1Variant::kMacro: return "macro";
    case F1Variant::kWeighted: return "weighted";
  }
  return "";
}

F1Variant parse_f1_variant(std::string_view s) {
  if (s == "positive") return F1Variant::kPositive;
  if (s == "macro") return F1Variant::kMacro;
  if (s == "weighted") return F1Variant::kWeighted;
  throw Error(ErrorCode::kParameter, "unknown F1 variant: " + std::string(s));
}

double MetricsReport::f1(F1Variant variant) const {
  switch (variant) {
    case F1Variant::kPositive: return positive_f1.value_or(macro_f1);
    case F1Variant::kMacro: return macro_f1;
    case F1Variant::kWeighted: return weighted_f1;
  }
  return macro_f1;
}

const ClassMetrics& MetricsReport::of(Label label) const {
  for (const auto& c : per_class) {
    if (c.label == label) return c;
  }
  throw Error(ErrorCode::kInvalidLabel, "no metrics for label " + std::string(label_name(label)));
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  const auto schema = LabelSchema::of(cm.schema());
  MetricsReport m;
  m.schema = cm.schema();
  m.samples = cm.total();
  m.accuracy = ratio(cm.trace(), cm.total());
  const std::size_t c = cm.classes();
  double macro = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t predicted = 0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < c; ++j) {
      predicted += cm.at(j, k);
      support += cm.at(k, j);
    }
    ClassMetrics cls;
    cls.label = schema.at(k);
    cls.support = support;
    cls.precision = ratio(cm.at(k, k), predicted);
    cls.recall = ratio(cm.at(k, k), support);
    cls.f1 = f1_score(cls.precision, cls.recall);
    macro += cls.f1;
    weighted += cls.f1 * ratio(support, cm.total());
    m.per_class.push_back(cls);
  }
  m.macro_f1 = macro / static_cast<double>(c);
  m.weighted_f1 = weighted;
  if (cm.schema() == SchemaKind::kBinary) m.positive_f1 = m.of(Label::kSuicidal).f1;
  return m;
}

MetricsReport compute_metrics(std::span<const Label> predictions, std::span<const Label> golds, SchemaKind schema) {
  check_inputs(predictions, golds, LabelSchema::of(schema));
  ConfusionMatrix cm(schema);
  for (std::size_t i = 0; i < golds.size(); ++i) cm.add(golds[i], predictions[i]);
  return metrics_from_confusion(cm);
}

bool verify_against_reference(std::span<const Label> predictions, std::span<const Label> golds, SchemaKind schema) {
  const MetricsReport got = compute_metrics(predictions, golds, schema);
  const auto s = LabelSchema::of(schema);
  const std::size_t n = golds.size();

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += predictions[i] == golds[i] ? 1 : 0;
  if (got.accuracy != ratio(correct, n)) return false;

  double macro = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Label l = s.at(k);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (predictions[i] == l && golds[i] == l) ++tp;
      if (predictions[i] == l && golds[i] != l) ++fp;
      if (predictions[i] != l && golds[i] == l) ++fn;
    }
    const double p = ratio(tp, tp + fp);
    const double r = ratio(tp, tp + fn);
    const double f = f1_score(p, r);
    const auto& cls = got.per_class.at(k);
    if (cls.label != l || cls.precision != p || cls.recall != r || cls.f1 != f || cls.support != tp + fn) return false;
    macro += f;
    weighted += f * ratio(tp + fn, n);
    if (l == Label::kSuicidal && got.positive_f1 != f) return false;
  }
  return got.macro_f1 == macro / static_cast<double>(s.size()) &&
         got.weighted_f1 == weighted &&
         got.positive_f1.has_value() == (schema == SchemaKind::kBinary);
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : m.per_class) {
    classes.push_back({{"label", label_name(c.label)},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  nlohmann::json j = {{"schema", to_string(m.schema)}, {"samples", m.samples},     {"accuracy", m.accuracy},
                      {"per_class", classes},          {"f1_macro", m.macro_f1}, {"f1_weighted", m.weighted_f1}};
  j["f1_positive"] = m.positive_f1 ? nlohmann::json(*m.positive_f1) : nlohmann::json(nullptr);
  return j;
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.schema = parse_schema_kind(j.at("schema").get<std::string>());
  m.samples = j.at("samples").get<std::size_t>();
  m.accuracy = j.at("accuracy").get<double>();
  for (const auto& c : j.at("per_class")) {
    m.per_class.push_back({parse_label(c.at("label").get<std::string>()), c.at("precision").get<double>(),
                           c.at("recall").get<double>(), c.at("f1").get<double>(),
                           c.at("support").get<std::size_t>()});
  }
  m.macro_f1 = j.at("f1_macro").get<double>();
  m.weighted_f1 = j.at("f1_weighted").get<double>();
  if (auto it = j.find("f1_positive"); it != j.end() && !it->is_null()) m.positive_f1 = it->get<double>();
  return m;
}

MetricsReport Trainer::evaluate(const Model& model, const Dataset& test_set) {
  if (model.schema() != test_set.schema()) {
    throw Error(ErrorCode::kSchema, "model schema " + std::string(to_string(model.schema())) +
                                        " does not match test set " + test_set.name());
  }
  std::vector<Label> predictions;
  std::vector<Label> golds;
  predictions.reserve(test_set.size());
  golds.reserve(test_set.size());
  for (const auto& r : test_set.records()) {
    predictions.push_back(model.predict_label(r.text));
    golds.push_back(r.label);
  }
  return compute_metrics(predictions, golds, test_set.schema());
}

}  // namespace sisynth
