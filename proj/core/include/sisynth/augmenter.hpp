#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"
#include "sisynth/error.hpp"
#include "sisynth/metrics.hpp"
#include "sisynth/trainer.hpp"

namespace sisynth {

/// k pairwise-disjoint samples of round(rate * N) record ids each, drawn
/// label-stratified. Throws kInfeasibleFolds when k * rate > 1 or the folds
/// do not fit into N records.
std::vector<std::set<std::string>> make_folds(const Dataset& real_train, double rate, std::size_t k,
                                              std::uint64_t seed);

struct AugmentationPlan {
  std::string synthetic;   // dataset name
  std::string real_train;  // dataset name
  std::vector<double> rates = {0.10, 0.20, 0.30};
  std::size_t folds = 3;
  std::uint64_t seed = 0;
  std::vector<std::string> test_sets;
  /// Index into test_sets used by the stop rule.
  std::size_t primary_test = 0;
  F1Variant f1_variant = F1Variant::kPositive;

  void validate() const;
};

nlohmann::json to_json(const AugmentationPlan& p);
AugmentationPlan augmentation_plan_from_json(const nlohmann::json& j);

struct SeriesStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

/// Single-pass (Welford) mean and population standard deviation.
SeriesStats summarize(std::span<const double> values);

struct FoldRun {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::vector<MetricsReport> metrics;  // one per test set
};

struct CellSummary {
  std::string test_set;
  SeriesStats accuracy;
  SeriesStats f1;
};

struct RateResult {
  double rate = 0.0;
  std::size_t fold_size = 0;
  std::vector<FoldRun> runs;
  std::vector<CellSummary> cells;  // filled once every fold has run
};

struct SweepReport {
  AugmentationPlan plan;
  double baseline_f1 = 0.0;
  std::vector<RateResult> rates;
  std::optional<double> stop_rate;
  bool complete = false;
  std::string error;  // set when the sweep aborted
};

/// First rate, in plan order, whose mean F1 on the primary test set reaches
/// the baseline.
std::optional<double> find_stop_rate(const SweepReport& report);

nlohmann::json to_json(const SweepReport& r);
/// Rows: test set x {accuracy, f1} (mean +/- stddev); columns: rates.
std::string render_text(const SweepReport& r);

class SweepAborted : public Error {
 public:
  SweepAborted(const std::string& message, SweepReport partial)
      : Error(ErrorCode::kTrainer, message), partial_(std::move(partial)) {}
  const SweepReport& partial() const { return partial_; }

 private:
  SweepReport partial_;
};

/// For every rate and fold trains on synthetic + fold and scores every test
/// set. A trainer failure throws SweepAborted carrying the completed runs.
/// Throws kLeakage when a fold or the synthetic set shares ids with a test set.
SweepReport run_sweep(const AugmentationPlan& plan, const Dataset& synthetic, const Dataset& real_train,
                      std::span<const Dataset> test_sets, Trainer& trainer, double baseline_f1);

}  // namespace sisynth
