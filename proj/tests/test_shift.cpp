#include <gtest/gtest.h>

#include "pitree/shift.hpp"

using namespace pitree;

namespace {

FilterCert ladder(uint64_t upTo) {
  FilterCert c;
  for (uint64_t m = 0; m <= upTo; ++m) c.sets.push_back(FilterSet::cofiniteBelow(m));
  return c;
}

FilterCert evenLadder(uint64_t upTo) {
  FilterCert c;
  for (uint64_t m = 0; m <= upTo; ++m)
    c.sets.push_back(FilterSet::arith(2, 2 * ((m + 1) / 2)));
  return c;
}

}  // namespace

TEST(FilterSets, MembershipAndSuccessor) {
  auto ex = FilterSet::explicitSet({5, 2, 2, 9});
  EXPECT_TRUE(ex.contains(2));
  EXPECT_FALSE(ex.contains(3));
  EXPECT_FALSE(ex.isInfinite());
  EXPECT_EQ(ex.nextAfter(-1), 2);
  EXPECT_EQ(ex.nextAfter(5), 9);
  EXPECT_EQ(ex.nextAfter(9), std::nullopt);

  auto co = FilterSet::cofiniteBelow(4);
  EXPECT_FALSE(co.contains(3));
  EXPECT_TRUE(co.contains(4));
  EXPECT_EQ(co.nextAfter(-1), 4);
  EXPECT_EQ(co.nextAfter(7), 8);

  auto om = FilterSet::cofiniteOmit({2, 3});
  EXPECT_TRUE(om.contains(0));
  EXPECT_FALSE(om.contains(3));
  EXPECT_EQ(om.nextAfter(1), 4);

  auto ar = FilterSet::arith(3, 5);
  EXPECT_TRUE(ar.contains(11));
  EXPECT_FALSE(ar.contains(6));
  EXPECT_EQ(ar.nextAfter(-1), 5);
  EXPECT_EQ(ar.nextAfter(5), 8);
  EXPECT_THROW(FilterSet::arith(0, 1), ConfigError);
  EXPECT_THROW(FilterSet::explicitSet({}), ConfigError);
}

TEST(FilterSets, SubsetDecisions) {
  auto evens = FilterSet::arith(2, 0);
  EXPECT_TRUE(FilterSet::explicitSet({2, 4}).subsetOf(evens));
  EXPECT_FALSE(FilterSet::explicitSet({2, 5}).subsetOf(evens));

  EXPECT_TRUE(FilterSet::arith(2, 4).subsetOf(FilterSet::cofiniteBelow(3)));
  EXPECT_FALSE(FilterSet::arith(2, 2).subsetOf(FilterSet::cofiniteBelow(3)));

  EXPECT_TRUE(FilterSet::arith(4, 6).subsetOf(evens));
  EXPECT_FALSE(FilterSet::arith(4, 6).subsetOf(FilterSet::arith(2, 1)));

  EXPECT_TRUE(FilterSet::cofiniteBelow(5).subsetOf(FilterSet::cofiniteOmit({1, 3})));
  EXPECT_FALSE(FilterSet::cofiniteBelow(5).subsetOf(FilterSet::cofiniteOmit({7})));

  EXPECT_TRUE(FilterSet::cofiniteOmit({0, 1, 2}).subsetOf(FilterSet::cofiniteBelow(3)));
  EXPECT_FALSE(FilterSet::cofiniteOmit({0, 2}).subsetOf(FilterSet::cofiniteBelow(3)));

  // a cofinite set only fits in a progression of step one
  EXPECT_TRUE(FilterSet::cofiniteBelow(3).subsetOf(FilterSet::arith(1, 2)));
  EXPECT_FALSE(FilterSet::cofiniteBelow(3).subsetOf(evens));
  EXPECT_TRUE(FilterSet::cofiniteOmit({0, 1}).subsetOf(FilterSet::arith(1, 2)));

  EXPECT_FALSE(evens.subsetOf(FilterSet::explicitSet({0, 2, 4})));
  EXPECT_FALSE(FilterSet::explicitSet({3}).subsetOf(FilterSet::cofiniteOmit({3})));
}

TEST(FilterSets, JsonRoundTrip) {
  for (const auto& s :
       {FilterSet::explicitSet({1, 4}), FilterSet::cofiniteBelow(6),
        FilterSet::cofiniteOmit({0, 9}), FilterSet::arith(5, 2)}) {
    auto back = FilterSet::fromJson(s.toJson());
    EXPECT_EQ(back.toJson(), s.toJson());
  }
  auto lad = FilterCert::fromJson(Json{{"ladder", Json{{"upTo", 8}}}});
  ASSERT_EQ(lad.sets.size(), 9u);
  EXPECT_FALSE(lad.sets[5].contains(4));
  EXPECT_TRUE(lad.sets[5].contains(5));

  auto alad = FilterCert::fromJson(
      Json{{"arithLadder", Json{{"step", 2}, {"upTo", 8}}}});
  ASSERT_EQ(alad.sets.size(), 9u);
  EXPECT_TRUE(alad.sets[3].contains(4));   // evens from 4
  EXPECT_FALSE(alad.sets[3].contains(2));
  EXPECT_FALSE(alad.sets[3].contains(5));

  // the enumeration cycles once past the listed representatives
  EXPECT_TRUE(lad.at(10).contains(1));
  EXPECT_FALSE(lad.at(10).contains(0));
}

TEST(ShiftRecursion, CofiniteLaddersGiveOddLandmarks) {
  // both coordinates carry the tail-set ladder; everything collapses to
  // f_i(n) = i and the landmarks walk the odd numbers
  auto sr = shiftFilters({ladder(8), ladder(8)}, {FilterCert{}, ladder(8)});
  for (uint64_t i = 0; i < 12; ++i) {
    EXPECT_EQ(sr.f(i, 0), (int64_t)i);
    EXPECT_EQ(sr.f(i, 1), (int64_t)i);
    EXPECT_EQ(sr.h(i), (int64_t)(2 * i + 1));
  }
  for (uint64_t x = 0; x < 30; ++x) {
    EXPECT_EQ(sr.alpha()[0](x), 2 * x + 1);
    EXPECT_EQ(sr.alpha()[1](x), 2 * x + 3);
  }
  EXPECT_EQ(sr.alpha()[0].at(-1), -1);
}

TEST(ShiftRecursion, EvenRefinementStretchesTheLandmarks) {
  // coordinate 1 refines through even tails, so its picks are f_i(1) = 2i
  // and the landmark gaps widen to absorb the doubled stride
  auto sr = shiftFilters({ladder(8), ladder(8)}, {FilterCert{}, evenLadder(8)});
  for (uint64_t i = 0; i < 12; ++i) {
    EXPECT_EQ(sr.f(i, 0), (int64_t)i);
    EXPECT_EQ(sr.f(i, 1), (int64_t)(2 * i));
  }
  EXPECT_EQ(sr.h(0), 1);
  EXPECT_EQ(sr.h(1), 3);
  EXPECT_EQ(sr.h(2), 6);
  EXPECT_EQ(sr.h(3), 9);
  for (uint64_t i = 2; i < 12; ++i) EXPECT_EQ(sr.h(i), (int64_t)(3 * i));

  const auto& a0 = sr.alpha()[0];
  const auto& a1 = sr.alpha()[1];
  EXPECT_EQ(a0(0), 1u);
  EXPECT_EQ(a0(1), 3u);
  EXPECT_EQ(a0(2), 6u);
  EXPECT_EQ(a0(3), 9u);
  EXPECT_EQ(a1(0), 3u);
  EXPECT_EQ(a1(1), 4u);   // gap fill between landmarks
  EXPECT_EQ(a1(2), 6u);
  EXPECT_EQ(a1(3), 7u);
  EXPECT_EQ(a1(4), 9u);
  EXPECT_EQ(a1(6), 12u);
}

TEST(ShiftRecursion, MonotoneAndDominating) {
  for (auto gamma1 : {ladder(8), evenLadder(8)}) {
    auto sr = shiftFilters({ladder(8), ladder(8)}, {FilterCert{}, gamma1});
    for (uint32_t n = 0; n < 2; ++n)
      for (uint64_t x = 0; x < 40; ++x)
        EXPECT_LT(sr.alpha()[n](x), sr.alpha()[n](x + 1));
    // each landmark gap strictly exceeds every coordinate's f-gap
    for (int64_t i = 0; i < 12; ++i)
      for (uint32_t j = 0; j < 2 && (int64_t)j <= i; ++j) {
        int64_t fgap = sr.f((uint64_t)(i - j), j) -
                       (i - j == 0 ? -1 : sr.f((uint64_t)(i - j - 1), j));
        EXPECT_GE(sr.h((uint64_t)i) - (i == 0 ? -1 : sr.h((uint64_t)(i - 1))),
                  fgap + 1);
      }
  }
}

TEST(ShiftRecursion, ImagesOfThePicksAreLandmarkTails) {
  auto sr = shiftFilters({ladder(8), ladder(8)}, {FilterCert{}, evenLadder(8)});
  for (uint32_t n = 0; n < 2; ++n)
    for (uint64_t l = 0; l < 20; ++l)
      EXPECT_EQ((int64_t)sr.alpha()[n]((uint64_t)sr.f(l, n)), sr.h(n + l));
}

TEST(ShiftRecursion, ImagesAlwaysMeet) {
  std::vector<FilterCert> delta = {ladder(8), ladder(8)};
  for (auto gamma1 : {ladder(8), evenLadder(8)}) {
    auto sr = shiftFilters(delta, {FilterCert{}, gamma1});
    auto rep = checkClubCondition(sr, delta, 200, 3);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.entries.size(), 81u);
    for (const auto& e : rep.entries) {
      EXPECT_GE(e.common.size(), 3u);
      // spot check: reported common values really lie in both images
      for (uint64_t y : e.common) {
        bool in0 = false, in1 = false;
        for (uint64_t x = 0; x <= y; ++x) {
          if (delta[0].sets[e.pick[0]].contains(x) && sr.alpha()[0](x) == y) in0 = true;
          if (delta[1].sets[e.pick[1]].contains(x) && sr.alpha()[1](x) == y) in1 = true;
        }
        EXPECT_TRUE(in0 && in1);
      }
    }
  }
}

TEST(ShiftRecursion, ThreeCoordinates) {
  FilterCert g2;
  for (uint64_t m = 0; m <= 6; ++m)
    g2.sets.push_back(FilterSet::arith(3, 3 * ((m + 2) / 3)));
  std::vector<FilterCert> delta = {ladder(4), ladder(4), ladder(4)};
  auto sr = shiftFilters(delta, {FilterCert{}, ladder(4), g2});
  for (uint64_t l = 0; l < 10; ++l) {
    EXPECT_EQ(sr.f(l, 2), (int64_t)(3 * l));
    for (uint32_t n = 0; n < 3; ++n)
      EXPECT_EQ((int64_t)sr.alpha()[n]((uint64_t)sr.f(l, n)), sr.h(n + l));
  }
  EXPECT_TRUE(checkClubCondition(sr, delta, 200, 3).pass);
}

TEST(ShiftGuards, RefusalAndExhaustion) {
  // a single coordinate cannot shift
  EXPECT_THROW(shiftFilters({ladder(2)}, {FilterCert{}}), LambdaTooSmall);

  // even tails are not contained in any odd progression
  FilterCert oddOnly;
  oddOnly.sets.push_back(FilterSet::arith(2, 1));
  FilterCert evens;
  evens.sets.push_back(FilterSet::arith(2, 0));
  EXPECT_THROW(shiftFilters({ladder(2), evens}, {FilterCert{}, oddOnly}),
               NotRefining);

  // a finite base set runs dry while the prefix is forced
  FilterCert tiny;
  tiny.sets.push_back(FilterSet::explicitSet({1, 2, 3}));
  EXPECT_THROW(shiftFilters({tiny, ladder(2)}, {FilterCert{}, ladder(2)}),
               FIPViolation);

  // two disjoint certificate sets have no common element to pick
  FilterCert disjoint;
  disjoint.sets.push_back(FilterSet::explicitSet({1, 2}));
  disjoint.sets.push_back(FilterSet::explicitSet({5, 6}));
  FilterCert dband;
  dband.sets.push_back(FilterSet::explicitSet({1, 2, 5, 6}));
  EXPECT_THROW(shiftFilters({ladder(2), dband}, {FilterCert{}, disjoint}),
               FIPViolation);

  EXPECT_THROW(shiftFilters({ladder(2), ladder(2)}, {FilterCert{}}), ConfigError);
}
