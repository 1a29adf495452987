#include <gtest/gtest.h>

#include "sisynth/error.hpp"
#include "sisynth/taxonomy.hpp"

namespace sisynth {
namespace {

TEST(Taxonomy, DefaultRegistryHasFourteenTopicsInOrder) {
  const auto& reg = default_registry();
  ASSERT_EQ(reg.size(), 14u);
  EXPECT_EQ(reg.topics().front().display_name, "Depression");
  EXPECT_EQ(reg.topics()[11].display_name, "Death of closed one");
  EXPECT_EQ(reg.topics().back().display_name, "Racism");
}

TEST(Taxonomy, FindMatchesIdOrDisplayName) {
  const auto& reg = default_registry();
  ASSERT_NE(reg.find("Financial Crisis"), nullptr);
  EXPECT_EQ(reg.find("financial crisis")->id, "financial-crisis");
  EXPECT_EQ(reg.find("family-issues")->display_name, "Family issues");
  EXPECT_EQ(reg.find("astrology"), nullptr);
}

TEST(Taxonomy, RegistryRejectsDuplicateIds) {
  std::vector<Topic> topics = {{"a", "A", "", {}}, {"a", "B", "", {}}};
  EXPECT_THROW(TopicRegistry{topics}, Error);
}

TEST(Taxonomy, SchemasListLevelsInRiskOrder) {
  EXPECT_EQ(LabelSchema::binary().labels(), (std::vector<Label>{Label::kNonSuicidal, Label::kSuicidal}));
  EXPECT_EQ(LabelSchema::fourclass().size(), 4u);
  EXPECT_EQ(LabelSchema::fourclass().at(3), Label::kHighRisk);
}

TEST(Taxonomy, BinarizeMapping) {
  EXPECT_EQ(binarize(Label::kNoRisk), Label::kNonSuicidal);
  EXPECT_EQ(binarize(Label::kLowRisk), Label::kNonSuicidal);
  EXPECT_EQ(binarize(Label::kModerateRisk), Label::kSuicidal);
  EXPECT_EQ(binarize(Label::kHighRisk), Label::kSuicidal);
  EXPECT_THROW(binarize(Label::kSuicidal), Error);
}

TEST(Taxonomy, ParseLabelAcceptsCanonicalAndDisplayNames) {
  EXPECT_EQ(parse_label("NonSuicidal"), Label::kNonSuicidal);
  EXPECT_EQ(parse_label("Moderate Risk"), Label::kModerateRisk);
  try {
    parse_label("Medium");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidLabel);
  }
}

TEST(Taxonomy, WithCriteriaReplacesProse) {
  const auto s = LabelSchema::binary().with_criteria({{Label::kSuicidal, "custom"}});
  EXPECT_NE(render_criteria(s).find("Risk Level=Suicidal: custom"), std::string::npos);
  EXPECT_THROW(LabelSchema::binary().with_criteria({{Label::kHighRisk, "x"}}), Error);
}

}  // namespace
}  // namespace sisynth
