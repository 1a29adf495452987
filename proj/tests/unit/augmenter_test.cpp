#include <gtest/gtest.h>

#include <cmath>

#include "fake_trainer.hpp"
#include "sisynth/augmenter.hpp"
#include "sisynth/error.hpp"
#include "split_properties.hpp"
#include "test_support.hpp"

namespace sisynth {
namespace {

using testing::check_folds;
using testing::make_dataset;
using testing::random_dataset;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

TEST(Augmenter, FoldsForStandardRates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = random_dataset(seed + 50, 20 + seed * 37, seed % 2 ? SchemaKind::kBinary : SchemaKind::kFourClass, false);
    for (int pct : {10, 20, 30}) {
      const auto folds = make_folds(ds, pct / 100.0, 3, seed);
      const auto err = check_folds(ds, folds, pct, 3);
      ASSERT_TRUE(err.empty()) << err << " seed " << seed << " rate " << pct;
    }
  }
}

TEST(Augmenter, InfeasibleFoldsRejected) {
  const auto ds = make_dataset("real", SchemaKind::kBinary, 100);
  EXPECT_EQ(code_of([&] { make_folds(ds, 0.4, 3, 1); }), ErrorCode::kInfeasibleFolds);
  EXPECT_EQ(code_of([&] { make_folds(ds, 0.0, 3, 1); }), ErrorCode::kParameter);
  EXPECT_EQ(code_of([&] { make_folds(ds, 0.2, 0, 1); }), ErrorCode::kParameter);
  // round(0.33 * 5) = 2, three folds need 6 of 5 records.
  const auto small = make_dataset("small", SchemaKind::kBinary, 5);
  EXPECT_EQ(code_of([&] { make_folds(small, 0.33, 3, 1); }), ErrorCode::kInfeasibleFolds);
}

TEST(Augmenter, FoldsDeterministic) {
  const auto ds = random_dataset(3, 300, SchemaKind::kBinary, false);
  EXPECT_EQ(make_folds(ds, 0.2, 3, 5), make_folds(ds, 0.2, 3, 5));
  EXPECT_NE(make_folds(ds, 0.2, 3, 5), make_folds(ds, 0.2, 3, 6));
}

TEST(Augmenter, SummarizeMatchesTwoPass) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng.below(10));
    for (auto& x : v) x = rng.uniform();
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const auto s = summarize(v);
    EXPECT_NEAR(s.mean, mean, 1e-12);
    EXPECT_NEAR(s.stddev, std::sqrt(ss / static_cast<double>(v.size())), 1e-12);
    EXPECT_EQ(s.count, v.size());
  }
  EXPECT_EQ(summarize(std::vector<double>{}).count, 0u);
}

SweepReport report_with_means(const std::vector<double>& means, double baseline) {
  SweepReport r;
  r.baseline_f1 = baseline;
  r.plan.test_sets = {"real-test"};
  for (std::size_t i = 0; i < means.size(); ++i) {
    RateResult rr;
    rr.rate = r.plan.rates[i];
    rr.cells.push_back({"real-test", {}, {means[i], 0.0, 3}});
    r.rates.push_back(rr);
  }
  return r;
}

TEST(Augmenter, StopRuleFindsFirstParityRate) {
  auto r = report_with_means({0.79, 0.84, 0.88}, 0.87);
  ASSERT_TRUE(find_stop_rate(r).has_value());
  EXPECT_DOUBLE_EQ(*find_stop_rate(r), 0.30);
  EXPECT_DOUBLE_EQ(*find_stop_rate(report_with_means({0.87, 0.9, 0.95}, 0.87)), 0.10);
  EXPECT_FALSE(find_stop_rate(report_with_means({0.79, 0.84, 0.86}, 0.87)).has_value());
}

struct SweepFixture {
  Dataset synthetic = make_dataset("synthetic", SchemaKind::kBinary, 30, "synth", SyntheticSource{"gpt"});
  Dataset real = make_dataset("real-train", SchemaKind::kBinary, 60, "real");
  std::vector<Dataset> tests = {make_dataset("real-test", SchemaKind::kBinary, 12, "heldout")};
  AugmentationPlan plan;
};

TEST(Augmenter, SweepRunsEveryRateAndFold) {
  SweepFixture fx;
  testing::MemorizingTrainer trainer;
  const auto r = run_sweep(fx.plan, fx.synthetic, fx.real, fx.tests, trainer, 0.5);
  ASSERT_EQ(r.rates.size(), 3u);
  EXPECT_EQ(trainer.calls(), 9u);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.rates[1].fold_size, 12u);
  EXPECT_EQ(r.rates[2].runs[0].train_size, 30u + 18u);
  for (const auto& rr : r.rates) {
    ASSERT_EQ(rr.cells.size(), 1u);
    std::vector<double> f1;
    for (const auto& run : rr.runs) f1.push_back(run.metrics[0].f1(F1Variant::kPositive));
    const auto s = summarize(f1);
    EXPECT_EQ(rr.cells[0].f1.mean, s.mean);
  }
  EXPECT_NE(render_text(r).find("parity not reached"), std::string::npos);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("rates").size(), 3u);
}

TEST(Augmenter, SweepAbortKeepsCompletedRuns) {
  SweepFixture fx;
  testing::MemorizingTrainer trainer(4);
  try {
    run_sweep(fx.plan, fx.synthetic, fx.real, fx.tests, trainer, 0.5);
    FAIL();
  } catch (const SweepAborted& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrainer);
    const auto& p = e.partial();
    EXPECT_FALSE(p.complete);
    ASSERT_EQ(p.rates.size(), 2u);
    EXPECT_EQ(p.rates[0].runs.size(), 3u);
    EXPECT_EQ(p.rates[1].runs.size(), 1u);
    EXPECT_FALSE(p.error.empty());
  }
}

TEST(Augmenter, SweepChecksLeakageBeforeTraining) {
  SweepFixture fx;
  fx.tests = {fx.real.with_name("leaky")};
  testing::MemorizingTrainer trainer;
  EXPECT_EQ(code_of([&] { run_sweep(fx.plan, fx.synthetic, fx.real, fx.tests, trainer, 0.5); }), ErrorCode::kLeakage);
  EXPECT_EQ(trainer.calls(), 0u);
}

TEST(Augmenter, PlanValidationAndJson) {
  AugmentationPlan p;
  p.rates = {1.5};
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.seed = 9;
  p.test_sets = {"a", "b"};
  p.primary_test = 1;
  p.f1_variant = F1Variant::kMacro;
  const auto q = augmentation_plan_from_json(to_json(p));
  EXPECT_EQ(q.seed, 9u);
  EXPECT_EQ(q.primary_test, 1u);
  EXPECT_EQ(q.f1_variant, F1Variant::kMacro);
  EXPECT_EQ(q.rates, p.rates);
}

}  // namespace
}  // namespace sisynth
