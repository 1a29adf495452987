#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"
#include "sisynth/metrics.hpp"
#include "sisynth/trainer.hpp"

namespace sisynth {

struct EvalMatrix {
  std::vector<std::string> train_sets;
  std::vector<std::string> test_sets;
  std::vector<std::vector<MetricsReport>> cells;  // [train][test]

  const MetricsReport& at(std::size_t train, std::size_t test) const { return cells.at(train).at(test); }
};

/// Throws kLeakage when the two datasets share a record id.
void check_disjoint(const Dataset& train, const Dataset& test);

struct MatrixOptions {
  /// Rows trained concurrently; the trainer must then be thread-safe.
  std::size_t workers = 1;
};

/// One model per training set, scored on every test set. Throws kLeakage on
/// any train/test id overlap and kSchema on mixed schemas.
EvalMatrix evaluate_matrix(std::span<const Dataset> train_sets, std::span<const Dataset> test_sets, Trainer& trainer,
                           const MatrixOptions& options = {});

nlohmann::json to_json(const EvalMatrix& m);

/// Columns are training sets; rows are (test set, metric) pairs with
/// metrics accuracy, f1_positive (binary only), f1_macro, f1_weighted.
std::string render_csv(const EvalMatrix& m);
std::string render_text(const EvalMatrix& m);

}  // namespace sisynth
