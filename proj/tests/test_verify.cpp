#include <gtest/gtest.h>

#include <random>

#include "pitree/cocountable.hpp"
#include "pitree/hybrid.hpp"
#include "pitree/product.hpp"
#include "pitree/sorgenfrey.hpp"
#include "pitree/standard.hpp"
#include "pitree/verify.hpp"

using namespace pitree;

namespace {

Point zeros() { return Point(BairePoint{{}, 0}); }

Point sp(int64_t num, int64_t den = 1) { return Point(SorgPoint{makeRat(num, den)}); }

const CheckEntry& entryById(const Report& rep, const std::string& id) {
  for (const auto& c : rep.checks)
    if (c.id == id) return c;
  throw std::runtime_error("no entry " + id);
}

}  // namespace

TEST(Reports, ExitCodeFollowsTheWorstEntry) {
  Report rep;
  EXPECT_EQ(rep.exitCode(), 0);
  rep.add("a", "(x)", CheckStatus::Pass);
  EXPECT_EQ(rep.exitCode(), 0);
  rep.add("b", "(x)", CheckStatus::Inconclusive);
  EXPECT_EQ(rep.exitCode(), 3);
  rep.add("c", "(x)", CheckStatus::Fail, Json{{"node", "<>"}});
  EXPECT_EQ(rep.exitCode(), 1);
  EXPECT_TRUE(rep.anyFail());
  EXPECT_FALSE(rep.allPass());

  auto j = rep.toJson();
  ASSERT_EQ(j["checks"].size(), 3u);
  EXPECT_EQ(j["checks"][1]["status"], "inconclusive");
  EXPECT_EQ(j["checks"][2]["clause"], "(x)");
  EXPECT_EQ(j["checks"][2]["witness"]["node"], "<>");
}

TEST(BaireSuite, StandardTreePassesAndIsDeterministic) {
  auto t = standardTree();
  Report rep = baireFoliageSuite(*t, 6, 32);
  EXPECT_EQ(rep.exitCode(), 0) << rep.toJson().dump(2);
  EXPECT_EQ(entryById(rep, "root-leaf").clause, "(F0=X)");
  EXPECT_EQ(rep.toJson(), baireFoliageSuite(*t, 6, 32).toJson());
}

TEST(BaireSuite, SorgenfreyAndProductPass) {
  EXPECT_EQ(baireFoliageSuite(*sorgenfreyTree(), 5, 8).exitCode(), 0);
  auto pp = productTree(2, {sorgenfreyTree(), sorgenfreyTree()});
  Report rep = baireFoliageSuite(*pp, 4, 6);
  EXPECT_EQ(rep.exitCode(), 0) << rep.toJson().dump(2);
}

TEST(BaireSuite, ABlockGraftHybridPasses) {
  // one rescale block grafted onto the root keeps every invariant
  auto base = standardTree();
  auto h = fhybr(base, {blockGraft(base, {}, 2)});
  Report rep = baireFoliageSuite(*h, 5, 8);
  EXPECT_EQ(rep.exitCode(), 0) << rep.toJson().dump(2);
}

TEST(GrowsInto, StandardTreeRisesWithAFullTail) {
  auto t = standardTree();
  std::vector<GrowsIntoSample> samples = {{zeros(), ClopenSet::cyl({0, 0})}};
  Report rep = growsIntoSuite(*t, samples, 6);
  const auto& main = entryById(rep, "sample-0");
  EXPECT_EQ(main.clause, "(♥)");
  EXPECT_EQ(main.status, CheckStatus::Pass);
  EXPECT_EQ(main.witness["rise"]["known"], Json::array({2, 3, 4, 5}));
  EXPECT_EQ(main.witness["tailFrom"], 2);
  EXPECT_EQ(entryById(rep, "sample-0/tail").clause, "(cofin)");
  EXPECT_EQ(rep.exitCode(), 0);
}

TEST(GrowsInto, SorgenfreyRisesWithAFullTail) {
  auto t = sorgenfreyTree();
  std::vector<GrowsIntoSample> samples = {
      {sp(0), ClopenSet::sorgIv(makeRat(0), makeRat(1, 8))}};
  Report rep = growsIntoSuite(*t, samples, 8);
  const auto& main = entryById(rep, "sample-0");
  EXPECT_EQ(main.status, CheckStatus::Pass);
  ASSERT_TRUE(main.witness.contains("tailFrom"));
  EXPECT_LE(main.witness["tailFrom"].get<uint64_t>(), 5u);
  EXPECT_EQ(rep.exitCode(), 0);
}

TEST(GrowsInto, PointRemovalCitesTheSuits) {
  auto h = cocountableTree(sorgenfreyTree(), {sp(0)});
  auto u = ClopenSet::minus(ClopenSet::sorgIv(makeRat(1, 3), makeRat(7, 12)), {sp(0)});
  Report rep = growsIntoSuite(*h, {{sp(1, 3), u}}, 8);
  const auto& main = entryById(rep, "sample-0");
  EXPECT_EQ(main.clause, "(♦)");
  EXPECT_EQ(main.status, CheckStatus::Pass);
  const auto& odd = entryById(rep, "sample-0/odd-tail");
  EXPECT_EQ(odd.clause, "(♠)");
  EXPECT_EQ(odd.status, CheckStatus::Pass) << rep.toJson().dump(2);
  EXPECT_LE(odd.witness["oddTailFrom"].get<uint64_t>(), 5u);
}

TEST(GrowsInto, AMissedNeighborhoodFailsWithTheRiseAsWitness) {
  // a neighborhood off the branch of the point: no shoot ever fits
  auto t = standardTree();
  std::vector<GrowsIntoSample> samples = {{zeros(), ClopenSet::cyl({7})}};
  Report rep = growsIntoSuite(*t, samples, 5);
  const auto& main = entryById(rep, "sample-0");
  EXPECT_EQ(main.status, CheckStatus::Fail);
  EXPECT_TRUE(main.witness["rise"]["known"].empty());
}

TEST(Fip, MeetsOfKnownPartsPassOrComeOutDepthLimited) {
  RiseSet a{{2, 3, 4}, {}, 5};
  RiseSet b{{3, 4}, {}, 5};
  Report good = fipCheck({a, b});
  EXPECT_EQ(good.exitCode(), 0);
  EXPECT_EQ(entryById(good, "full-fip").witness["meet"], Json::array({3, 4}));

  RiseSet c{{1}, {}, 5};
  RiseSet d{{2}, {}, 5};
  Report thin = fipCheck({c, d});
  EXPECT_EQ(thin.exitCode(), 3);
  const auto& pw = entryById(thin, "pairwise-fip");
  EXPECT_EQ(pw.status, CheckStatus::Inconclusive);
  EXPECT_TRUE(pw.witness["depthLimited"].get<bool>());
}

TEST(FaultInjection, OverlapIsCaughtByDisjointness) {
  auto bad = corruptTree(standardTree(), {1}, 2, CorruptMode::OverlapSons);
  Report rep = baireFoliageSuite(*bad, 4, 8);
  EXPECT_TRUE(rep.anyFail());
  const auto& dj = entryById(rep, "pairwise-disjoint");
  EXPECT_EQ(dj.status, CheckStatus::Fail);
  EXPECT_EQ(dj.witness["node"], "<1>");
  EXPECT_EQ(dj.witness["sons"], Json::array({2, 3}));
}

TEST(FaultInjection, EscapeIsCaughtByTheNonincreasingCheck) {
  auto bad = corruptTree(sorgenfreyTree(), {0, 1}, 3, CorruptMode::LeafEscape);
  Report rep = baireFoliageSuite(*bad, 4, 8);
  EXPECT_TRUE(rep.anyFail());
  const auto& in = entryById(rep, "nonincreasing");
  EXPECT_EQ(in.status, CheckStatus::Fail);
  EXPECT_EQ(in.witness["node"], "<0,1>");
  EXPECT_EQ(in.witness["son"], 3);
}

TEST(FaultInjection, ADroppedPointIsCaughtByThePeel) {
  auto bad = corruptTree(standardTree(), {0}, 1, CorruptMode::DropPoint);
  Report rep = baireFoliageSuite(*bad, 4, 8);
  EXPECT_TRUE(rep.anyFail());
  const auto& pl = entryById(rep, "locally-strict");
  EXPECT_EQ(pl.status, CheckStatus::Fail);
  EXPECT_EQ(pl.witness["node"], "<0>");
  EXPECT_TRUE(pl.witness.contains("lostPoint")) << pl.witness.dump();
}

TEST(FaultInjection, TwentySeededFaultsAreAllCaught) {
  std::mt19937 rng(903412);
  for (int seed = 0; seed < 20; ++seed) {
    CorruptMode mode = seed % 3 == 0   ? CorruptMode::OverlapSons
                       : seed % 3 == 1 ? CorruptMode::LeafEscape
                                       : CorruptMode::DropPoint;
    TreePtr base = seed % 2 ? sorgenfreyTree() : standardTree();
    uint64_t depth = rng() % 3;
    if (mode == CorruptMode::LeafEscape && depth == 0) depth = 1;
    NodePath at;
    for (uint64_t i = 0; i < depth; ++i) at.push_back(rng() % 3);
    uint64_t son = rng() % 5;

    auto bad = corruptTree(base, at, son, mode);
    Report rep = baireFoliageSuite(*bad, 4, 8);
    EXPECT_TRUE(rep.anyFail()) << "seed " << seed << "\n" << rep.toJson().dump(2);
    bool witnessed = false;
    for (const auto& c : rep.checks)
      if (c.status == CheckStatus::Fail && c.witness.contains("node")) witnessed = true;
    EXPECT_TRUE(witnessed) << "seed " << seed;
  }
  // the honest bases stay green at the same parameters
  EXPECT_EQ(baireFoliageSuite(*standardTree(), 4, 8).exitCode(), 0);
  EXPECT_EQ(baireFoliageSuite(*sorgenfreyTree(), 4, 8).exitCode(), 0);
}

TEST(FaultInjection, EscapeNeedsANodeBelowTheRoot) {
  EXPECT_THROW(corruptTree(standardTree(), {}, 0, CorruptMode::LeafEscape), ConfigError);
  EXPECT_THROW(corruptTree(nullptr, {0}, 0, CorruptMode::OverlapSons), ConfigError);
}
