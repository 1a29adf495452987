#include "sisynth/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "sisynth/error.hpp"
#include "sisynth/rng.hpp"

namespace sisynth {
namespace {

constexpr std::string_view kModelFormat = "sisynth-baseline-v1";

void softmax_in_place(std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

std::size_t argmax(const std::vector<double>& p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return best;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kParameter, "learning_rate must be positive");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw Error(ErrorCode::kParameter, "l2 must be non-negative");
  if (learning_rate * l2 >= 1.0) throw Error(ErrorCode::kParameter, "learning_rate * l2 must be below 1");
  if (batch_size == 0) throw Error(ErrorCode::kParameter, "batch_size must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"l2", c.l2},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.l2 = j.value("l2", c.l2);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

LinearModel::LinearModel(SchemaKind schema, std::size_t dimension)
    : schema_(schema),
      classes_(LabelSchema::of(schema).size()),
      dimension_(dimension),
      weights_(classes_ * dimension, 0.0),
      bias_(classes_, 0.0) {}

std::vector<double> LinearModel::logits(const SparseVector& x) const {
  std::vector<double> z(bias_);
  for (std::size_t c = 0; c < classes_; ++c) {
    const double* row = weights_.data() + c * dimension_;
    for (const auto& [j, v] : x.entries) z[c] += row[j] * v;
  }
  return z;
}

std::vector<double> LinearModel::probabilities(const SparseVector& x) const {
  auto z = logits(x);
  softmax_in_place(z);
  return z;
}

double loss_and_gradient(const LinearModel& model, std::span<const Example> batch, double l2, LinearModel* gradient) {
  if (batch.empty()) throw Error(ErrorCode::kParameter, "empty batch");
  const std::size_t c_count = model.classes();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  if (gradient) *gradient = LinearModel(model.schema(), model.dimension());

  double ce = 0.0;
  for (const auto& ex : batch) {
    const auto p = model.probabilities(ex.x);
    ce -= std::log(p[ex.y]);
    if (!gradient) continue;
    for (std::size_t c = 0; c < c_count; ++c) {
      const double delta = (p[c] - (c == ex.y ? 1.0 : 0.0)) * inv_b;
      gradient->bias(c) += delta;
      for (const auto& [j, v] : ex.x.entries) gradient->weight(c, j) += delta * v;
    }
  }
  double norm2 = 0.0;
  for (double w : model.weights()) norm2 += w * w;
  if (gradient) {
    for (std::size_t c = 0; c < c_count; ++c) {
      for (std::size_t j = 0; j < model.dimension(); ++j) gradient->weight(c, j) += l2 * model.weight(c, j);
    }
  }
  return ce * inv_b + 0.5 * l2 * norm2;
}

TrainResult train_linear(std::span<const Example> examples, SchemaKind schema, std::size_t dimension,
                         const TrainConfig& config) {
  config.validate();
  const std::size_t c_count = LabelSchema::of(schema).size();
  std::set<std::size_t> present;
  for (const auto& ex : examples) {
    if (ex.y >= c_count) throw Error(ErrorCode::kInvalidLabel, "class index outside schema");
    for (const auto& [j, v] : ex.x.entries) {
      if (j >= dimension) throw Error(ErrorCode::kParameter, "feature column outside model dimension");
    }
    present.insert(ex.y);
  }
  if (present.size() < 2) {
    throw Error(ErrorCode::kDegenerateData, "training data must contain at least two classes, found " +
                                                std::to_string(present.size()));
  }

  // W is kept as scale * U so that the L2 shrink is O(1) per step and only
  // touched columns are updated.
  std::vector<double> u(c_count * dimension, 0.0);
  std::vector<double> bias(c_count, 0.0);
  double scale = 1.0;
  double u_norm2 = 0.0;
  const double shrink = 1.0 - config.learning_rate * config.l2;

  std::vector<double> grad(c_count * dimension, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<char> is_touched(dimension, 0);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::vector<double> bias_grad(c_count, 0.0);
      double ce = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = examples[order[k]];
        std::vector<double> z(bias);
        for (std::size_t c = 0; c < c_count; ++c) {
          const double* row = u.data() + c * dimension;
          double dot = 0.0;
          for (const auto& [j, v] : ex.x.entries) dot += row[j] * v;
          z[c] += scale * dot;
        }
        softmax_in_place(z);
        ce -= std::log(z[ex.y]);
        for (const auto& [j, v] : ex.x.entries) {
          if (!is_touched[j]) {
            is_touched[j] = 1;
            touched.push_back(j);
          }
        }
        for (std::size_t c = 0; c < c_count; ++c) {
          const double delta = (z[c] - (c == ex.y ? 1.0 : 0.0)) * inv_b;
          bias_grad[c] += delta;
          double* g = grad.data() + c * dimension;
          for (const auto& [j, v] : ex.x.entries) g[j] += delta * v;
        }
      }
      const double batch_loss = ce * inv_b + 0.5 * config.l2 * scale * scale * u_norm2;
      epoch_loss += batch_loss * static_cast<double>(end - start);

      scale *= shrink;
      std::sort(touched.begin(), touched.end());
      for (std::size_t c = 0; c < c_count; ++c) {
        bias[c] -= config.learning_rate * bias_grad[c];
        double* row = u.data() + c * dimension;
        double* g = grad.data() + c * dimension;
        for (std::uint32_t j : touched) {
          const double before = row[j];
          row[j] -= config.learning_rate * g[j] / scale;
          u_norm2 += row[j] * row[j] - before * before;
          g[j] = 0.0;
        }
      }
      for (std::uint32_t j : touched) is_touched[j] = 0;
      touched.clear();

      if (scale < 1e-6) {
        u_norm2 = 0.0;
        for (double& w : u) {
          w *= scale;
          u_norm2 += w * w;
        }
        scale = 1.0;
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(examples.size()));
  }

  result.model = LinearModel(schema, dimension);
  for (std::size_t c = 0; c < c_count; ++c) {
    result.model.bias(c) = bias[c];
    for (std::size_t j = 0; j < dimension; ++j) result.model.weight(c, j) = scale * u[c * dimension + j];
  }
  return result;
}

Prediction predict(const LinearModel& model, const FeatureModel& features, std::string_view text) {
  if (model.dimension() != features.dimension()) {
    throw Error(ErrorCode::kParameter, "model and feature dimensions differ");
  }
  Prediction p;
  p.probabilities = model.probabilities(features.transform(text));
  p.label = LabelSchema::of(model.schema()).at(argmax(p.probabilities));
  return p;
}

BaselineModel::BaselineModel(FeatureModel features, LinearModel weights, std::vector<double> epoch_loss)
    : features_(std::move(features)), weights_(std::move(weights)), epoch_loss_(std::move(epoch_loss)) {
  if (weights_.dimension() != features_.dimension()) {
    throw Error(ErrorCode::kParameter, "model and feature dimensions differ");
  }
}

Label BaselineModel::predict_label(std::string_view text) const { return predict(text).label; }

Prediction BaselineModel::predict(std::string_view text) const {
  return sisynth::predict(weights_, features_, text);
}

nlohmann::json BaselineModel::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (Label l : LabelSchema::of(weights_.schema()).labels()) classes.push_back(label_name(l));
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < weights_.classes(); ++c) {
    const auto begin = weights_.weights().begin() + static_cast<std::ptrdiff_t>(c * weights_.dimension());
    rows.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(weights_.dimension())));
  }
  return {{"format", kModelFormat},
          {"schema", to_string(weights_.schema())},
          {"classes", classes},
          {"dimension", weights_.dimension()},
          {"vocabulary_hash", features_.vocabulary_hash()},
          {"features", features_.to_json()},
          {"weights", rows},
          {"bias", weights_.biases()},
          {"epoch_loss", epoch_loss_}};
}

BaselineModel BaselineModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kModelFormat) {
    throw Error(ErrorCode::kParameter, "unsupported model file format");
  }
  auto features = FeatureModel::from_json(j.at("features"));
  if (j.at("vocabulary_hash").get<std::string>() != features.vocabulary_hash()) {
    throw Error(ErrorCode::kParameter, "model vocabulary hash does not match its features");
  }
  LinearModel w(parse_schema_kind(j.at("schema").get<std::string>()), j.at("dimension").get<std::size_t>());
  const auto& rows = j.at("weights");
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (rows.size() != w.classes() || bias.size() != w.classes()) {
    throw Error(ErrorCode::kParameter, "model class count does not match schema");
  }
  for (std::size_t c = 0; c < w.classes(); ++c) {
    const auto row = rows[c].get<std::vector<double>>();
    if (row.size() != w.dimension()) throw Error(ErrorCode::kParameter, "model row has wrong dimension");
    for (std::size_t k = 0; k < row.size(); ++k) w.weight(c, k) = row[k];
    w.bias(c) = bias[c];
  }
  return BaselineModel(std::move(features), std::move(w), j.value("epoch_loss", std::vector<double>{}));
}

void BaselineModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model file " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing model file " + path.string());
}

BaselineModel BaselineModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParameter, "malformed model file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

BaselineModel BaselineTrainer::fit(const Dataset& train_set) const {
  if (train_set.empty()) throw Error(ErrorCode::kDegenerateData, "training set " + train_set.name() + " is empty");
  std::vector<std::string> texts;
  texts.reserve(train_set.size());
  for (const auto& r : train_set.records()) texts.push_back(r.text);
  auto features = FeatureModel::fit(texts, max_vocabulary_);

  const auto schema = LabelSchema::of(train_set.schema());
  std::vector<Example> examples;
  examples.reserve(train_set.size());
  for (const auto& r : train_set.records()) examples.push_back({features.transform(r.text), schema.index_of(r.label)});
  auto result = train_linear(examples, train_set.schema(), features.dimension(), config_);
  return BaselineModel(std::move(features), std::move(result.model), std::move(result.epoch_loss));
}

std::shared_ptr<const Model> BaselineTrainer::train(const Dataset& train_set) {
  return std::make_shared<const BaselineModel>(fit(train_set));
}

}  // namespace sisynth
