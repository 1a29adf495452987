#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/features.hpp"
#include "sisynth/taxonomy.hpp"
#include "sisynth/trainer.hpp"

namespace sisynth {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  double l2 = 1e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Multinomial logistic regression; class order is schema order.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(SchemaKind schema, std::size_t dimension);

  SchemaKind schema() const { return schema_; }
  std::size_t classes() const { return classes_; }
  std::size_t dimension() const { return dimension_; }

  double weight(std::size_t c, std::size_t j) const { return weights_[c * dimension_ + j]; }
  double& weight(std::size_t c, std::size_t j) { return weights_[c * dimension_ + j]; }
  double bias(std::size_t c) const { return bias_[c]; }
  double& bias(std::size_t c) { return bias_[c]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return bias_; }

  std::vector<double> logits(const SparseVector& x) const;
  /// Softmax over logits.
  std::vector<double> probabilities(const SparseVector& x) const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  SchemaKind schema_ = SchemaKind::kBinary;
  std::size_t classes_ = 0;
  std::size_t dimension_ = 0;
  std::vector<double> weights_;  // row-major C x V
  std::vector<double> bias_;
};

struct Example {
  SparseVector x;
  std::size_t y = 0;  // schema index
};

/// Mean cross-entropy over the batch plus (l2 / 2) * ||W||^2 (bias is not
/// penalized). When `gradient` is non-null it receives dLoss/dW and dLoss/db.
double loss_and_gradient(const LinearModel& model, std::span<const Example> batch, double l2,
                         LinearModel* gradient = nullptr);

struct TrainResult {
  LinearModel model;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Mini-batch gradient descent from a zero model; batch order reshuffled
/// each epoch from the seed. Throws kDegenerateData when fewer than two
/// classes are present.
TrainResult train_linear(std::span<const Example> examples, SchemaKind schema, std::size_t dimension,
                         const TrainConfig& config);

struct Prediction {
  Label label;
  std::vector<double> probabilities;  // schema order
};

/// Argmax with ties going to the lowest class index.
Prediction predict(const LinearModel& model, const FeatureModel& features, std::string_view text);

/// Feature model plus weights; the unit persisted as a model file.
class BaselineModel : public Model {
 public:
  BaselineModel(FeatureModel features, LinearModel weights, std::vector<double> epoch_loss = {});

  SchemaKind schema() const override { return weights_.schema(); }
  Label predict_label(std::string_view text) const override;
  Prediction predict(std::string_view text) const;

  const FeatureModel& features() const { return features_; }
  const LinearModel& weights() const { return weights_; }
  const std::vector<double>& epoch_loss() const { return epoch_loss_; }

  nlohmann::json to_json() const;
  static BaselineModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static BaselineModel load(const std::filesystem::path& path);

 private:
  FeatureModel features_;
  LinearModel weights_;
  std::vector<double> epoch_loss_;
};

/// Fits features on the training texts, then trains the linear model.
class BaselineTrainer : public Trainer {
 public:
  explicit BaselineTrainer(TrainConfig config = {}, std::size_t max_vocabulary = kDefaultMaxVocabulary)
      : config_(config), max_vocabulary_(max_vocabulary) {}

  std::shared_ptr<const Model> train(const Dataset& train_set) override;
  BaselineModel fit(const Dataset& train_set) const;

  const TrainConfig& config() const { return config_; }

 private:
  TrainConfig config_;
  std::size_t max_vocabulary_;
};

}  // namespace sisynth
