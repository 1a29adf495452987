#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "sisynth/dataset.hpp"
#include "sisynth/metrics.hpp"

namespace sisynth {

/// A trained, immutable classifier. Implementations must be safe to call
/// from several threads.
class Model {
 public:
  virtual ~Model() = default;
  virtual SchemaKind schema() const = 0;
  virtual Label predict_label(std::string_view text) const = 0;
};

class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual std::shared_ptr<const Model> train(const Dataset& train_set) = 0;
  /// Default: predicts every record and calls compute_metrics.
  virtual MetricsReport evaluate(const Model& model, const Dataset& test_set);
};

}  // namespace sisynth
