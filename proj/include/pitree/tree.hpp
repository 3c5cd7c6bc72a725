#pragma once

/****************************************************************************
 * Foliage trees over omega-branching skeletons.
 *
 * A tree hands out, for every node path, the lazily enumerated family of
 * its sons' leaves.  Everything else (leaves, scopes, refinement of shoots,
 * rise sets) is derived here.  Son families are pure functions of the path,
 * so they are memoized; trees are immutable and single threaded.
 ****************************************************************************/

#include <map>
#include <memory>

#include "pitree/sets.hpp"

namespace pitree {

class FoliageTree;
using TreePtr = std::shared_ptr<const FoliageTree>;

class FoliageTree {
 public:
  virtual ~FoliageTree() = default;

  virtual const Space& space() const = 0;
  virtual ClopenSet rootLeaf() const = 0;
  virtual Json term() const = 0;  // the construction this tree denotes

  // witness material for the strict-branch proxy at a node: a separation
  // measure together with the bound it is required to reach at that depth
  virtual Json branchProxy(const NodePath& v) const = 0;

  // whether the tree came out of one of the certified constructions; the
  // product builder insists on this for its components
  virtual bool certified() const { return false; }

  // lazy-free superset of leafAt(v), for families that must quote a plain
  // bound for derived sets; constructions with lazy leaves override this
  virtual ClopenSet plainLeafBound(const NodePath& v) const { return leafAt(v); }

  const FamilyPtr& sons(const NodePath& v) const {
    auto it = memo_.find(v);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(v, makeSons(v)).first->second;
  }

  ClopenSet leafAt(const NodePath& v) const {
    if (v.empty()) return rootLeaf();
    NodePath parent(v.begin(), v.end() - 1);
    return sons(parent)->leafAt(v.back());
  }

  uint64_t heightOf(const NodePath& v) const { return v.size(); }

 protected:
  virtual FamilyPtr makeSons(const NodePath& v) const = 0;

 private:
  mutable std::map<NodePath, FamilyPtr> memo_;
};

/* ----- scope ----- */

// the first d nodes of the branch of nodes whose leaves contain p
inline std::vector<NodePath> scope(const FoliageTree& t, const Point& p, uint64_t d) {
  if (!pointInSpace(p, t.space())) throw SpaceMismatch("scope of a foreign point");
  if (!member(p, t.rootLeaf()))
    throw PointOutsideRoot("point lies outside the root leaf");
  std::vector<NodePath> out{{}};
  NodePath v;
  for (uint64_t h = 1; h < d; ++h) {
    auto idx = t.sons(v)->locate(p);
    if (!idx)
      throw PartitionViolation("no son leaf claims the point at " + pathToString(v));
    v.push_back(*idx);
    if (!member(p, t.leafAt(v)))
      throw PartitionViolation("locate returned a son not containing the point at " +
                               pathToString(v));
    out.push_back(v);
  }
  return out;
}

/* ----- refinement of shoots ----- */

// do cofinitely many son leaves of v fit inside the target?
inline RefineDecision shootRefines(const FoliageTree& t, const NodePath& v,
                                   const ClopenSet& target) {
  if (target.space() != t.space()) throw SpaceMismatch("target from a foreign space");
  return t.sons(v)->refines(target);
}

/* ----- rise ----- */

struct RiseSet {
  std::vector<uint64_t> known;      // heights decided to belong
  std::vector<uint64_t> undecided;  // heights the engine could not decide
  uint64_t unknownBeyond = 0;       // nothing is claimed at this height or above

  bool knownContains(uint64_t h) const {
    return std::binary_search(known.begin(), known.end(), h);
  }
  Json toJson() const {
    return Json{{"known", known}, {"undecided", undecided}, {"unknownBeyond", unknownBeyond}};
  }
};

inline RiseSet rise(const FoliageTree& t, const Point& p, const ClopenSet& target,
                    uint64_t d) {
  RiseSet out;
  out.unknownBeyond = d;
  auto sc = scope(t, p, d);
  for (uint64_t h = 0; h < sc.size(); ++h) {
    RefineDecision rd = shootRefines(t, sc[h], target);
    if (rd.verdict == Triv::Yes)
      out.known.push_back(h);
    else if (rd.verdict == Triv::Unknown)
      out.undecided.push_back(h);
  }
  return out;
}

/* ----- canonical truncation ----- */

// a finite, explicitly materialized truncation: paths in the canonical son
// indexing, each with its leaf and the residual after the last explicit son
struct StaticNode {
  NodePath path;
  ClopenSet leaf;
  std::vector<ClopenSet> explicitSons;
  ClopenSet residualAfter;
  bool expanded = false;  // whether this node's sons appear as nodes
};

struct StaticTree {
  Space space;
  Json term;
  std::vector<StaticNode> nodes;  // breadth first, root first
};

// materializes the tree to the given depth with the given son width; throws
// NotOmegaBranching when some visited family runs out of nonempty leaves
inline StaticTree canonicalize(const FoliageTree& t, uint64_t d, uint64_t sonWidth) {
  StaticTree out{t.space(), t.term(), {}};
  std::vector<NodePath> frontier{{}};
  for (uint64_t level = 0; level <= d; ++level) {
    std::vector<NodePath> next;
    for (const auto& v : frontier) {
      StaticNode n;
      n.path = v;
      n.leaf = t.leafAt(v);
      if (level < d) {
        const auto& fam = *t.sons(v);
        for (uint64_t i = 0; i < sonWidth; ++i) {
          ClopenSet s = fam.leafAt(i);
          if (s.isEmptySet())
            throw NotOmegaBranching("empty son leaf at " + pathToString(v) +
                                    " index " + std::to_string(i));
          n.explicitSons.push_back(std::move(s));
        }
        n.residualAfter = fam.residual(sonWidth);
        if (n.residualAfter.isEmptySet())
          throw NotOmegaBranching("family at " + pathToString(v) +
                                  " is exhausted after " + std::to_string(sonWidth));
        n.expanded = true;
        for (uint64_t i = 0; i < sonWidth; ++i) {
          NodePath w = v;
          w.push_back(i);
          next.push_back(std::move(w));
        }
      } else {
        n.residualAfter = ClopenSet::empty(t.space());
      }
      out.nodes.push_back(std::move(n));
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return out;
}

}  // end of namespace pitree
