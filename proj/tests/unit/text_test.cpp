#include <gtest/gtest.h>

#include "taxwb/core/text.hpp"

using namespace taxwb::text;

TEST(TextTest, TrimStripsAsciiWhitespace) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim("   "), "");
}

TEST(TextTest, FoldCaseHandlesAsciiAndUnicode) {
  EXPECT_EQ(fold_case("Celestial Body"), "celestial body");
  EXPECT_EQ(fold_case("ΣΟΦΙΑ"), "σοφια");
  EXPECT_EQ(fold_case("Région"), "région");
  EXPECT_EQ(fold_case("ÉTOILE"), "étoile");
  EXPECT_TRUE(equals_folded("Sun", "sun"));
  EXPECT_FALSE(equals_folded("Sun", "Star"));
}

TEST(TextTest, FoldCasePassesInvalidBytesThrough) {
  const std::string bad = "A\xff" "B";
  EXPECT_EQ(fold_case(bad), "a\xff" "b");
}

TEST(TextTest, NormalizeLabel) {
  EXPECT_EQ(normalize_label("Family_Business"), "family business");
  EXPECT_EQ(normalize_label("  family   business "), "family business");
  EXPECT_EQ(normalize_label("Celestial body"), "celestial body");
}

TEST(TextTest, TokenizeSplitsOnSpaceUnderscoreHyphen) {
  EXPECT_EQ(tokenize("Family_Business"), (std::vector<std::string>{"family", "business"}));
  EXPECT_EQ(tokenize("Government-Funded Schools"),
            (std::vector<std::string>{"government", "funded", "schools"}));
  EXPECT_EQ(tokenize("Countries --- By Continent"),
            (std::vector<std::string>{"countries", "by", "continent"}));
}
