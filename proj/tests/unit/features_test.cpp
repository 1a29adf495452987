#include <gtest/gtest.h>

#include <cmath>

#include "sisynth/error.hpp"
#include "sisynth/features.hpp"

namespace sisynth {
namespace {

const std::vector<std::string> kCorpus = {"the cat sat", "the dog sat down", "a cat and a dog"};

TEST(Features, VocabularyRankedByCountThenLexicographic) {
  const auto f = FeatureModel::fit(kCorpus);
  // counts: a 2, cat 2, dog 2, sat 2, the 2, and 1, down 1
  const std::vector<std::string> want = {"a", "cat", "dog", "sat", "the", "and", "down"};
  EXPECT_EQ(f.vocabulary(), want);
  EXPECT_EQ(FeatureModel::fit(kCorpus, 3).vocabulary(), (std::vector<std::string>{"a", "cat", "dog"}));
}

TEST(Features, IdfFormula) {
  const auto f = FeatureModel::fit(kCorpus);
  const auto cat = *f.index_of("cat");
  EXPECT_EQ(f.document_frequency(cat), 2u);
  EXPECT_DOUBLE_EQ(f.idf(cat), std::log(4.0 / 3.0) + 1.0);
  const auto down = *f.index_of("down");
  EXPECT_DOUBLE_EQ(f.idf(down), std::log(4.0 / 2.0) + 1.0);
  EXPECT_EQ(f.document_frequency(*f.index_of("a")), 1u);
  EXPECT_FALSE(f.index_of("bird").has_value());
}

TEST(Features, TransformIsUnitLengthAndSorted) {
  const auto f = FeatureModel::fit(kCorpus);
  const auto v = f.transform("A cat, a CAT and a bird");
  double norm = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    norm += v.entries[i].second * v.entries[i].second;
    if (i) EXPECT_LT(v.entries[i - 1].first, v.entries[i].first);
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
  ASSERT_EQ(v.size(), 3u);
  const double a = 3 * f.idf(*f.index_of("a"));
  const double cat = 2 * f.idf(*f.index_of("cat"));
  const double andv = 1 * f.idf(*f.index_of("and"));
  const double n = std::sqrt(a * a + cat * cat + andv * andv);
  EXPECT_NEAR(v.entries[0].second, a / n, 1e-12);
  EXPECT_TRUE(f.transform("unknown words only").empty());
}

TEST(Features, JsonRoundTripChecksHash) {
  const auto f = FeatureModel::fit(kCorpus);
  const auto g = FeatureModel::from_json(f.to_json());
  EXPECT_EQ(g.vocabulary(), f.vocabulary());
  EXPECT_EQ(g.vocabulary_hash(), f.vocabulary_hash());
  EXPECT_EQ(g.transform("the cat").entries, f.transform("the cat").entries);
  auto j = f.to_json();
  j["vocabulary_hash"] = "0";
  EXPECT_THROW(FeatureModel::from_json(j), Error);
}

TEST(Features, EmptyCorpusRejected) {
  const std::vector<std::string> none;
  EXPECT_THROW(FeatureModel::fit(none), Error);
}

}  // namespace
}  // namespace sisynth
