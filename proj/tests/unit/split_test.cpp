#include <gtest/gtest.h>

#include "sisynth/error.hpp"
#include "sisynth/split.hpp"
#include "split_properties.hpp"
#include "test_support.hpp"

namespace sisynth {
namespace {

using testing::check_split;
using testing::random_dataset;

SplitSpec spec_of(testing::Percentages p, std::uint64_t seed, SplitUnit unit = SplitUnit::kAuto) {
  SplitSpec s;
  s.train = p.train / 100.0;
  s.test = p.test / 100.0;
  s.val = p.val / 100.0;
  s.seed = seed;
  s.unit = unit;
  return s;
}

TEST(Split, RoundCountRoundsHalvesUp) {
  EXPECT_EQ(round_count(0.1, 5), 1u);
  EXPECT_EQ(round_count(0.1, 4), 0u);
  EXPECT_EQ(round_count(0.2, 13), 3u);
  EXPECT_EQ(round_count(0.3, 5), 2u);
  for (std::size_t n = 0; n < 500; ++n) {
    EXPECT_EQ(round_count(0.1, n), testing::percent_round(10, n));
    EXPECT_EQ(round_count(0.2, n), testing::percent_round(20, n));
    EXPECT_EQ(round_count(0.7, n), testing::percent_round(70, n));
  }
}

TEST(Split, ApportionRespectsBounds) {
  const std::vector<double> q = {1.5, 2.5, 1.0};
  const std::vector<std::size_t> lo = {1, 2, 1}, hi = {2, 3, 1};
  const auto a = apportion(q, lo, hi, 5);
  EXPECT_EQ(a, (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_THROW(apportion(q, lo, hi, 7), Error);
  EXPECT_THROW(apportion(q, lo, hi, 3), Error);
}

// Every class-count vector with N <= 14 across two and four classes.
TEST(Split, ExhaustiveSmallCompositionsStayWithinOne) {
  const testing::Percentages mixes[] = {{70, 20, 10}, {80, 10, 10}, {60, 20, 20}, {50, 30, 20}};
  for (const auto& mix : mixes) {
    for (std::size_t a = 0; a <= 14; ++a) {
      for (std::size_t b = 0; a + b <= 14; ++b) {
        for (std::size_t c = 0; a + b + c <= 14; ++c) {
          for (std::size_t d = 0; a + b + c + d <= 14; ++d) {
            const std::size_t sizes[4] = {a, b, c, d};
            std::vector<TextRecord> recs;
            for (std::size_t k = 0; k < 4; ++k) {
              for (std::size_t i = 0; i < sizes[k]; ++i) {
                recs.push_back(testing::make_record("c" + std::to_string(k) + " r" + std::to_string(i),
                                                    LabelSchema::fourclass().at(k)));
              }
            }
            const Dataset ds("small", SchemaKind::kFourClass, std::move(recs));
            const auto out = split_dataset(ds, spec_of(mix, a * 131 + b * 17 + c * 3 + d));
            const auto err = check_split(ds, out, mix, false);
            ASSERT_TRUE(err.empty()) << err << " sizes " << a << "," << b << "," << c << "," << d << " mix "
                                     << mix.train << "/" << mix.test << "/" << mix.val;
          }
        }
      }
    }
  }
}

TEST(Split, RandomDatasetsSatisfyProperties) {
  Rng rng(2024);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 10 + static_cast<std::size_t>(rng.below(600));
    const bool users = i % 2 == 1;
    const auto schema = i % 3 == 0 ? SchemaKind::kBinary : SchemaKind::kFourClass;
    const auto ds = random_dataset(1000 + static_cast<std::uint64_t>(i), n, schema, users);
    const auto out = split_dataset(ds, spec_of({}, static_cast<std::uint64_t>(i)));
    const auto err = check_split(ds, out, {}, users);
    ASSERT_TRUE(err.empty()) << err << " dataset " << i << " n=" << n;
  }
}

TEST(Split, DeterministicPerSeed) {
  const auto ds = random_dataset(5, 300, SchemaKind::kBinary, false);
  const auto a = split_dataset(ds, spec_of({}, 1));
  const auto b = split_dataset(ds, spec_of({}, 1));
  const auto c = split_dataset(ds, spec_of({}, 2));
  EXPECT_EQ(a.test.content_hash(), b.test.content_hash());
  EXPECT_NE(a.test.content_hash(), c.test.content_hash());
}

TEST(Split, ByUserRequiresUserIds) {
  const auto ds = random_dataset(5, 50, SchemaKind::kBinary, false);
  try {
    split_dataset(ds, spec_of({}, 1, SplitUnit::kByUser));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSplit);
  }
}

TEST(Split, AutoPicksUsersWhenPresent) {
  const auto ds = random_dataset(8, 200, SchemaKind::kFourClass, true);
  const auto out = split_dataset(ds, spec_of({}, 3));
  EXPECT_EQ(out.train.creation_parameters().at("unit"), "by_user");
  EXPECT_EQ(split_dataset(ds, spec_of({}, 3, SplitUnit::kByRecord)).train.creation_parameters().at("unit"),
            "by_record");
}

TEST(Split, RejectsBadFractions) {
  const auto ds = random_dataset(5, 50, SchemaKind::kBinary, false);
  SplitSpec s;
  s.train = 0.8;
  EXPECT_THROW(split_dataset(ds, s), Error);
}

TEST(Split, PartNamesAndParams) {
  const auto ds = random_dataset(5, 50, SchemaKind::kBinary, false);
  const auto out = split_dataset(ds, spec_of({}, 1));
  EXPECT_EQ(out.train.name(), ds.name() + "-train");
  EXPECT_EQ(out.val.creation_parameters().at("part"), "val");
  EXPECT_EQ(out.test.creation_parameters().at("input_hash"), ds.content_hash());
}

}  // namespace
}  // namespace sisynth
