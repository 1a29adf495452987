#include <gtest/gtest.h>

#include "sisynth/hashing.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

TEST(Text, NormalizeWhitespaceCollapsesRuns) {
  EXPECT_EQ(normalize_whitespace("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(normalize_whitespace(""), "");
  EXPECT_EQ(trim("\t x y \n"), "x y");
}

TEST(Text, FoldKeyIgnoresCaseSpacesHyphens) {
  EXPECT_EQ(fold_key("Non-Suicidal"), fold_key("non suicidal"));
  EXPECT_EQ(fold_key("High_Risk"), "highrisk");
}

TEST(Text, AsciiNormalizeStraightensQuotes) {
  EXPECT_EQ(ascii_normalize("\xE2\x80\x9Chi\xE2\x80\x9D \xE2\x80\x94 it\xE2\x80\x99s"), "\"hi\" - it's");
  EXPECT_EQ(ascii_normalize("plain"), "plain");
}

TEST(Text, Utf8LengthCountsCodePoints) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("caf\xC3\xA9"), 4u);
}

TEST(Text, TokenizerLowercasesAndDropsPunctuation) {
  const auto t = tokenize_words("Hello, WORLD! I can't... 42 times.");
  const std::vector<std::string> want = {"hello", "world", "i", "cant", "42", "times"};
  EXPECT_EQ(t, want);
}

TEST(Text, TokenizerHandlesNonAscii) {
  const auto t = tokenize_words("\xC3\x89T\xC3\x89 caf\xC3\xA9");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "\xC3\xA9t\xC3\xA9");
}

TEST(Hashing, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(5).next(), c.next());
}

TEST(Rng, BelowStaysInRange) {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
  Rng r(3);
  r.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}));
}

}  // namespace
}  // namespace sisynth
