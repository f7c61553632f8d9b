#include <gtest/gtest.h>

#include "refladder/core.hpp"

using namespace refladder;

namespace {

ReferenceList make_list(std::vector<std::pair<std::string, double>> entries) {
  ReferenceList list;
  for (auto& [src, score] : entries) list.entries.push_back({src, src + " text", score});
  return list;
}

TEST(ValidateReferenceList, SortedWithOnePolicyEntryIsOk) {
  EXPECT_EQ(validate_reference_list(make_list({{"policy", 6.0}, {"a", 7.5}, {"b", 9.0}})), std::nullopt);
}

TEST(ValidateReferenceList, NamesFirstDescendingIndex) {
  EXPECT_EQ(validate_reference_list(make_list({{"policy", 7.5}, {"a", 6.0}})), "not ascending at index 2");
}

TEST(ValidateReferenceList, MissingPolicy) {
  EXPECT_EQ(validate_reference_list(make_list({{"a", 6.0}, {"b", 7.0}})), "missing policy reference");
}

TEST(ValidateReferenceList, DuplicatePolicy) {
  EXPECT_EQ(validate_reference_list(make_list({{"policy", 6.0}, {"policy", 7.0}})), "duplicate policy reference");
}

TEST(ValidateReferenceList, EmptyAndOutOfRange) {
  EXPECT_EQ(validate_reference_list(ReferenceList{}), "empty reference list");
  EXPECT_EQ(validate_reference_list(make_list({{"policy", 0.5}})), "score out of range at index 1");
}

TEST(ValidateReferenceList, EqualScoresWithinToleranceAreAscending) {
  EXPECT_EQ(validate_reference_list(make_list({{"policy", 7.0 + 1e-12}, {"a", 7.0}})), std::nullopt);
}

TEST(ReferenceOrder, TiesBreakBySourceId) {
  const CandidateResponse a{"a", "", 7.0};
  const CandidateResponse p{"policy", "", 7.0};
  EXPECT_TRUE(reference_order(a, p));
  EXPECT_FALSE(reference_order(p, a));
}

TEST(Reward, FromEveryVerdictLandsInThreeValues) {
  EXPECT_EQ(Reward::from_verdict(Verdict::Win).value(), 1.0);
  EXPECT_EQ(Reward::from_verdict(Verdict::Tie).value(), 0.5);
  EXPECT_EQ(Reward::from_verdict(Verdict::Loss).value(), 0.0);
  EXPECT_TRUE(Reward::from_verdict(Verdict::Win).is_win());
  EXPECT_FALSE(Reward::from_verdict(Verdict::Tie).is_win());
}

TEST(Verdict, NamesRoundTrip) {
  for (auto v : {Verdict::Win, Verdict::Tie, Verdict::Loss}) EXPECT_EQ(parse_verdict_name(to_string(v)), v);
  EXPECT_THROW(parse_verdict_name("draw"), ConfigError);
}

}  // namespace
