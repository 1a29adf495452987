#include <gtest/gtest.h>

#include "metrics_oracle.hpp"
#include "sisynth/error.hpp"
#include "sisynth/metrics.hpp"
#include "sisynth/rng.hpp"

namespace sisynth {
namespace {

constexpr Label S = Label::kSuicidal;
constexpr Label NS = Label::kNonSuicidal;

TEST(Metrics, HandCase) {
  const std::vector<Label> pred = {S, S, NS, NS};
  const std::vector<Label> gold = {S, NS, NS, NS};
  const auto m = compute_metrics(pred, gold, SchemaKind::kBinary);
  EXPECT_EQ(m.accuracy, 0.75);
  ASSERT_TRUE(m.positive_f1.has_value());
  EXPECT_DOUBLE_EQ(*m.positive_f1, 2.0 / 3.0);
  EXPECT_EQ(m.of(S).precision, 0.5);
  EXPECT_EQ(m.of(S).recall, 1.0);
  EXPECT_EQ(m.of(NS).support, 3u);
  EXPECT_DOUBLE_EQ(m.of(NS).f1, 0.8);
  EXPECT_EQ(m.f1(F1Variant::kPositive), *m.positive_f1);
}

TEST(Metrics, RandomVectorsMatchBruteForce) {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const auto kind = t % 2 ? SchemaKind::kFourClass : SchemaKind::kBinary;
    const auto schema = LabelSchema::of(kind);
    const std::size_t n = 1 + rng.below(20);
    std::vector<Label> pred, gold;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(schema.at(rng.below(schema.size())));
      gold.push_back(schema.at(rng.below(schema.size())));
    }
    const auto m = compute_metrics(pred, gold, kind);
    const auto o = testing::oracle_metrics(pred, gold, kind);
    EXPECT_EQ(m.accuracy, o.accuracy);
    EXPECT_EQ(m.macro_f1, o.macro);
    EXPECT_EQ(m.weighted_f1, o.weighted);
    for (std::size_t c = 0; c < schema.size(); ++c) {
      EXPECT_EQ(m.per_class[c].precision, o.precision[c]);
      EXPECT_EQ(m.per_class[c].recall, o.recall[c]);
      EXPECT_EQ(m.per_class[c].f1, o.f1[c]);
      EXPECT_EQ(m.per_class[c].support, o.support[c]);
    }
    if (kind == SchemaKind::kBinary) {
      EXPECT_EQ(*m.positive_f1, o.f1[1]);
    } else {
      EXPECT_FALSE(m.positive_f1.has_value());
      EXPECT_EQ(m.f1(F1Variant::kPositive), m.macro_f1);
    }
    EXPECT_TRUE(verify_against_reference(pred, gold, kind));
  }
}

TEST(Metrics, ZeroDenominatorsGiveZero) {
  const std::vector<Label> pred = {NS, NS};
  const std::vector<Label> gold = {NS, NS};
  const auto m = compute_metrics(pred, gold, SchemaKind::kBinary);
  EXPECT_EQ(*m.positive_f1, 0.0);
  EXPECT_EQ(m.of(NS).f1, 1.0);
  EXPECT_EQ(m.macro_f1, 0.5);
  EXPECT_EQ(m.weighted_f1, 1.0);
}

TEST(Metrics, InputErrors) {
  const std::vector<Label> one = {S};
  const std::vector<Label> two = {S, NS};
  const std::vector<Label> four = {Label::kHighRisk};
  const std::vector<Label> none;
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code([&] { compute_metrics(none, none, SchemaKind::kBinary); }), ErrorCode::kInput);
  EXPECT_EQ(code([&] { compute_metrics(one, two, SchemaKind::kBinary); }), ErrorCode::kInput);
  EXPECT_EQ(code([&] { compute_metrics(four, one, SchemaKind::kBinary); }), ErrorCode::kInvalidLabel);
}

TEST(Metrics, ConfusionMatrixCounts) {
  ConfusionMatrix cm(SchemaKind::kFourClass);
  cm.add(Label::kHighRisk, Label::kHighRisk);
  cm.add(Label::kHighRisk, Label::kLowRisk);
  cm.add(Label::kNoRisk, Label::kNoRisk);
  EXPECT_EQ(cm.total(), 3u);
  EXPECT_EQ(cm.trace(), 2u);
  EXPECT_EQ(cm.at(3, 1), 1u);
  const auto m = metrics_from_confusion(cm);
  EXPECT_DOUBLE_EQ(m.accuracy, 2.0 / 3.0);
  EXPECT_THROW(cm.add(S, S), Error);
}

TEST(Metrics, JsonRoundTripAndVariants) {
  const std::vector<Label> pred = {S, NS, S};
  const std::vector<Label> gold = {S, S, NS};
  const auto m = compute_metrics(pred, gold, SchemaKind::kBinary);
  EXPECT_EQ(metrics_report_from_json(to_json(m)), m);
  for (auto v : {F1Variant::kPositive, F1Variant::kMacro, F1Variant::kWeighted}) {
    EXPECT_EQ(parse_f1_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_f1_variant("micro"), Error);
}

}  // namespace
}  // namespace sisynth
