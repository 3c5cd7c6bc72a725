#include <gtest/gtest.h>

#include "pitree/standard.hpp"

using namespace pitree;

static Point constZero() { return Point(BairePoint{{}, 0}); }

// the effective index set of a yes decision: everything from tailFrom on,
// plus the checked indices below it that are not exceptions
static bool decidedIn(const RefineDecision& rd, uint64_t i) {
  if (rd.verdict != Triv::Yes) return false;
  if (i >= rd.tailFrom) return true;
  return !std::binary_search(rd.exceptions.begin(), rd.exceptions.end(), i);
}

TEST(StandardTree, ScopeOfConstantZero) {
  auto t = standardTree();
  auto sc = scope(*t, constZero(), 3);
  ASSERT_EQ(sc.size(), 3u);
  EXPECT_EQ(sc[0], NodePath{});
  EXPECT_EQ(sc[1], NodePath{0});
  EXPECT_EQ(sc[2], (NodePath{0, 0}));
}

TEST(StandardTree, ScopeFollowsThePoint) {
  auto t = standardTree();
  Point p(BairePoint{{3, 1}, 2});
  auto sc = scope(*t, p, 5);
  EXPECT_EQ(sc[4], (NodePath{3, 1, 2, 2}));
  for (const auto& v : sc) EXPECT_TRUE(member(p, t->leafAt(v)));
}

TEST(StandardTree, ShootRefinesOwnLeaf) {
  auto t = standardTree();
  RefineDecision rd = shootRefines(*t, {3}, ClopenSet::cyl({3}));
  EXPECT_EQ(rd.verdict, Triv::Yes);
  for (uint64_t i = 0; i < 12; ++i) EXPECT_TRUE(decidedIn(rd, i));
}

TEST(StandardTree, ShootRefinesTailCylinder) {
  auto t = standardTree();
  RefineDecision rd = shootRefines(*t, {}, ClopenSet::tailCyl({}, 5));
  EXPECT_EQ(rd.verdict, Triv::Yes);
  for (uint64_t i = 0; i < 16; ++i) EXPECT_EQ(decidedIn(rd, i), i >= 5);
}

TEST(StandardTree, ShootDoesNotRefineDeepCylinder) {
  auto t = standardTree();
  RefineDecision rd = shootRefines(*t, {}, ClopenSet::cyl({0, 1}));
  EXPECT_EQ(rd.verdict, Triv::No);
  EXPECT_FALSE(rd.witnesses.empty());
}

TEST(StandardTree, RiseOfCylinderNeighborhoods) {
  auto t = standardTree();
  Point p = constZero();
  for (uint64_t n = 0; n <= 3; ++n) {
    NodePath pre(n, 0);
    RiseSet rs = rise(*t, p, ClopenSet::cyl(pre), 8);
    EXPECT_TRUE(rs.undecided.empty());
    std::vector<uint64_t> want;
    for (uint64_t h = n; h < 8; ++h) want.push_back(h);
    EXPECT_EQ(rs.known, want) << "n = " << n;
    EXPECT_EQ(rs.unknownBeyond, 8u);
  }
}

TEST(StandardTree, RiseExampleDepthSix) {
  auto t = standardTree();
  RiseSet rs = rise(*t, constZero(), ClopenSet::cyl({0, 0}), 6);
  EXPECT_EQ(rs.known, (std::vector<uint64_t>{2, 3, 4, 5}));
}

TEST(StandardTree, RiseNeverEmptyOnSamples) {
  auto t = standardTree();
  std::vector<Point> samples{constZero(), Point(BairePoint{{2, 0, 1}, 1}),
                             Point(BairePoint{{5}, 3})};
  for (const auto& p : samples) {
    auto sc = scope(*t, p, 4);
    RiseSet rs = rise(*t, p, t->leafAt(sc[3]), 7);
    EXPECT_FALSE(rs.known.empty());
    // a cylinder neighborhood of p is refined from its own depth on
    EXPECT_EQ(rs.known.front(), 3u);
  }
}

TEST(StandardTree, PointOutsideRootOnlyForForeignSpaces) {
  auto t = standardTree();
  EXPECT_THROW(scope(*t, Point(SorgPoint{makeRat(0)}), 3), SpaceMismatch);
}

TEST(Canonicalize, MaterializesBreadthFirst) {
  auto t = standardTree();
  StaticTree st = canonicalize(*t, 2, 3);
  // levels: 1 + 3 + 9 nodes
  ASSERT_EQ(st.nodes.size(), 13u);
  EXPECT_EQ(st.nodes[0].path, NodePath{});
  EXPECT_EQ(st.nodes[0].explicitSons.size(), 3u);
  EXPECT_EQ(equalSets(st.nodes[0].residualAfter, ClopenSet::tailCyl({}, 3)), Triv::Yes);
  EXPECT_EQ(st.nodes[4].path, (NodePath{0, 0}));
  EXPECT_FALSE(st.nodes[4].expanded);
}

namespace {
// a deliberately finite family: only two sons ever
class StuntedFamily final : public SonFamily {
 public:
  ClopenSet leafAt(uint64_t i) const override {
    if (i < 2) return ClopenSet::cyl({i});
    return ClopenSet::empty(Space::baire());
  }
  ClopenSet residual(uint64_t n) const override {
    if (n == 0) return ClopenSet::tailCyl({}, 0);
    if (n == 1) return ClopenSet::cyl({1});
    return ClopenSet::empty(Space::baire());
  }
  std::optional<uint64_t> locate(const Point& p) const override {
    return p.baire().at(0) < 2 ? std::optional<uint64_t>(p.baire().at(0)) : std::nullopt;
  }
  ClopenSet plainBound() const override { return ClopenSet::cyl({}); }
  Json describe() const override { return Json{{"family", "stunted"}}; }
};

class StuntedTree final : public FoliageTree {
 public:
  const Space& space() const override {
    static const Space sp = Space::baire();
    return sp;
  }
  ClopenSet rootLeaf() const override { return ClopenSet::cyl({}); }
  Json term() const override { return Json{{"stunted", Json::object()}}; }
  Json branchProxy(const NodePath&) const override { return Json{{"ok", true}}; }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    if (v.empty()) return std::make_shared<StuntedFamily>();
    return std::make_shared<BaireSonFamily>(v, term());
  }
};
}  // namespace

TEST(Canonicalize, RejectsFiniteBranching) {
  StuntedTree t;
  EXPECT_THROW(canonicalize(t, 1, 4), NotOmegaBranching);
}
