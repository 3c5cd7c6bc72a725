#pragma once

/****************************************************************************
 * The standard tree on Baire space: the skeleton is the set of finite
 * integer words ordered by extension, and the leaf of a word is its
 * cylinder.  Son i of the node x is x + <i>; the residual after the first
 * n sons is the tail cylinder of x from n on.
 ****************************************************************************/

#include "pitree/tree.hpp"

namespace pitree {

class BaireSonFamily final : public SonFamily {
 public:
  BaireSonFamily(NodePath x, Json treeTerm)
      : x_(std::move(x)), term_(std::move(treeTerm)) {}

  ClopenSet leafAt(uint64_t i) const override {
    NodePath p = x_;
    p.push_back(i);
    return ClopenSet::cyl(std::move(p));
  }

  ClopenSet residual(uint64_t n) const override { return ClopenSet::tailCyl(x_, n); }

  std::optional<uint64_t> locate(const Point& p) const override {
    return p.baire().at(x_.size());
  }

  ClopenSet plainBound() const override { return ClopenSet::cyl(x_); }

  // son leaves beyond every numeric constant of the probe relate to it
  // uniformly: each atom either swallows the whole tail below x or misses it
  std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const override {
    return StabilityInfo{b.maxNat + 1, 1};
  }

  Json describe() const override {
    return Json{{"family", "baireSons"}, {"tree", term_}, {"path", x_}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(term_, x_);
  }

 private:
  NodePath x_;
  Json term_;
};

class StandardTree final : public FoliageTree {
 public:
  const Space& space() const override {
    static const Space sp = Space::baire();
    return sp;
  }

  ClopenSet rootLeaf() const override { return ClopenSet::cyl({}); }

  Json term() const override { return Json{{"standard", Json::object()}}; }

  bool certified() const override { return true; }

  Json branchProxy(const NodePath& v) const override {
    // along any branch the determined prefix grows by one per level
    return Json{{"measure", "determinedPrefix"},
                {"value", v.size()},
                {"required", v.size()},
                {"ok", true}};
  }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    return std::make_shared<BaireSonFamily>(v, term());
  }
};

inline TreePtr standardTree() { return std::make_shared<StandardTree>(); }

}  // end of namespace pitree
