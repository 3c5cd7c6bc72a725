#pragma once

/****************************************************************************
 * A foliage tree for the complement of finitely many points.
 *
 * Each removed point is handled by one stage.  The stage node z_i is the
 * unique node of the current partition whose leaf still contains p_i; its
 * sons in the new tree are all off-branch sons along the scope of p_i below
 * z_i, rows indexed by descent depth.  Every leaf of the new tree is the
 * host leaf with the removed points taken out, so the union of a stage's
 * son leaves recovers the stage leaf minus exactly p_i.  Stage nodes end up
 * at even heights and their sons at odd ones; the odd placement is what the
 * downstream checks rely on.  (Placing stage sons along any sequence k_n
 * with k_0 >= 1 and k_{n+1} > k_n + 1 would work the same way.)
 *
 * The subspace is represented over the host space: sets carry their removed
 * points explicitly.
 ****************************************************************************/

#include <map>

#include "pitree/tree.hpp"

namespace pitree {

namespace detail {

// the lazily extended scope of a removed point below its stage node
struct StageChain {
  Point p;
  NodePath zPath;
  mutable std::vector<NodePath> nodes;  // nodes[t], starting at zPath
  mutable std::vector<uint64_t> sIdx;   // on-branch son index at depth t
};

struct CocoCore {
  TreePtr base;
  std::vector<Point> pts;
  std::vector<StageChain> stages;
  std::map<NodePath, size_t> zIndex;  // stage node (base path) -> stage
  Json term;
  uint64_t walkCap = 512;

  const NodePath& uAt(size_t i, uint64_t t) const {
    const auto& st = stages[i];
    if (st.nodes.empty()) st.nodes.push_back(st.zPath);
    while (st.nodes.size() <= t) {
      const NodePath& cur = st.nodes.back();
      auto idx = base->sons(cur)->locate(st.p);
      if (!idx)
        throw PartitionViolation("scope of a removed point broke at " +
                                 pathToString(cur));
      st.sIdx.push_back(*idx);
      NodePath nx = cur;
      nx.push_back(*idx);
      st.nodes.push_back(std::move(nx));
    }
    return st.nodes[t];
  }

  uint64_t sAt(size_t i, uint64_t t) const {
    uAt(i, t + 1);
    return stages[i].sIdx[t];
  }

  std::vector<Point> ptsInside(const ClopenSet& s) const {
    std::vector<Point> in;
    for (const auto& q : pts)
      if (member(q, s)) in.push_back(q);
    return in;
  }

  // the leaf decoration: host set with all removed points taken out
  ClopenSet dropPts(const ClopenSet& s) const {
    return ClopenSet::minus(s, ptsInside(s));
  }

  // base node denoted by a path of the new tree
  NodePath toBase(const NodePath& vH) const {
    NodePath fv;
    for (uint64_t l : vH) {
      auto it = zIndex.find(fv);
      if (it != zIndex.end()) {
        auto [t, jp] = cantorUnpair(l);
        uint64_t s = sAt(it->second, t);
        fv = uAt(it->second, t);
        fv.push_back(jp < s ? jp : jp + 1);
      } else {
        fv.push_back(l);
      }
    }
    return fv;
  }

  // inverse of toBase; throws for base nodes the construction dropped
  NodePath fromBase(const NodePath& fv) const {
    NodePath out, cur;
    size_t pos = 0;
    while (pos < fv.size()) {
      auto it = zIndex.find(cur);
      if (it == zIndex.end()) {
        out.push_back(fv[pos]);
        cur.push_back(fv[pos]);
        ++pos;
        continue;
      }
      // follow the stage chain to where the target leaves it
      uint64_t t = 0;
      while (pos < fv.size() && fv[pos] == sAt(it->second, t)) {
        ++t;
        ++pos;
      }
      if (pos == fv.size())
        throw ConfigError("node was absorbed by a stage: " + pathToString(fv));
      uint64_t sigma = fv[pos];
      uint64_t s = sAt(it->second, t);
      out.push_back(cantorPair(t, sigma < s ? sigma : sigma - 1));
      cur = uAt(it->second, t);
      cur.push_back(sigma);
      ++pos;
    }
    return out;
  }
};

using CocoCorePtr = std::shared_ptr<const CocoCore>;

}  // end of namespace detail

/* ----- son families ----- */

// sons of a stage node: the off-branch sons along the removed point's
// scope, row t at descent depth t, with the on-branch index skipped
class StageFamily final : public SonFamily {
 public:
  StageFamily(detail::CocoCorePtr core, size_t stage, NodePath vH)
      : core_(std::move(core)), i_(stage), vH_(std::move(vH)) {}

  ClopenSet leafAt(uint64_t l) const override {
    return core_->dropPts(core_->base->leafAt(itemNode(l)));
  }

  ClopenSet residual(uint64_t n) const override {
    auto& runs = rescache_;
    if (runs.empty()) runs.push_back(core_->base->leafAt(core_->stages[i_].zPath));
    while (runs.size() <= n) {
      uint64_t l = runs.size() - 1;
      auto d = difference(runs.back(), core_->base->leafAt(itemNode(l)));
      if (!d || !d->plus.empty())
        throw PartitionViolation("stage residual did not peel exactly at item " +
                                 std::to_string(l));
      runs.push_back(d->core);
    }
    return core_->dropPts(runs[n]);
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    for (uint64_t t = 0; t <= core_->walkCap; ++t) {
      const NodePath& u = core_->uAt(i_, t);
      auto idx = core_->base->sons(u)->locate(p);
      if (!idx) return std::nullopt;
      uint64_t s = core_->sAt(i_, t);
      if (*idx != s) return cantorPair(t, *idx < s ? *idx : *idx - 1);
    }
    return std::nullopt;
  }

  ClopenSet plainBound() const override {
    return core_->base->plainLeafBound(core_->stages[i_].zPath);
  }

  RefineDecision refines(const ClopenSet& target) const override {
    RefineDecision out;
    std::vector<uint64_t> exceptions;
    for (uint64_t t = 0; t <= rowCap_; ++t) {
      // once the whole branch below row t fits, every later row does too
      if (isSubset(core_->dropPts(core_->base->leafAt(core_->uAt(i_, t))), target) ==
          Triv::Yes) {
        out.verdict = Triv::Yes;
        std::sort(exceptions.begin(), exceptions.end());
        out.exceptions = std::move(exceptions);
        out.tailFrom = out.exceptions.empty() ? 0 : out.exceptions.back() + 1;
        return out;
      }
      uint64_t s = core_->sAt(i_, t);
      RefineDecision rd = core_->base->sons(core_->uAt(i_, t))->refines(target);
      if (rd.verdict == Triv::No) {
        // finitely many removed points cannot rescue a failing class
        out.verdict = Triv::No;
        out.note = "a row of off-branch sons escapes the target";
        for (uint64_t w : rd.witnesses)
          if (w != s && isSubset(leafAtRow(t, w), target) == Triv::No)
            out.witnesses.push_back(cantorPair(t, w < s ? w : w - 1));
        return out;
      }
      if (rd.verdict == Triv::Unknown) {
        out.verdict = Triv::Unknown;
        out.note = "row " + std::to_string(t) + " undecided: " + rd.note;
        return out;
      }
      for (uint64_t e : rd.exceptions)
        if (e != s && isSubset(leafAtRow(t, e), target) != Triv::Yes)
          exceptions.push_back(cantorPair(t, e < s ? e : e - 1));
    }
    out.verdict = Triv::Unknown;
    out.note = "row scan budget exhausted";
    return out;
  }

  Json describe() const override {
    return Json{{"family", "cocountableStage"}, {"tree", core_->term},
                {"path", vH_}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(core_->term, vH_);
  }

 private:
  NodePath itemNode(uint64_t l) const {
    auto [t, jp] = cantorUnpair(l);
    uint64_t s = core_->sAt(i_, t);
    NodePath c = core_->uAt(i_, t);
    c.push_back(jp < s ? jp : jp + 1);
    return c;
  }

  ClopenSet leafAtRow(uint64_t t, uint64_t sigma) const {
    NodePath c = core_->uAt(i_, t);
    c.push_back(sigma);
    return core_->dropPts(core_->base->leafAt(c));
  }

  detail::CocoCorePtr core_;
  size_t i_;
  NodePath vH_;
  uint64_t rowCap_ = 24;
  mutable std::vector<ClopenSet> rescache_;
};

// sons of every other node: the host family with decorated leaves
class HostMinusFamily final : public SonFamily {
 public:
  HostMinusFamily(detail::CocoCorePtr core, NodePath fv, NodePath vH)
      : core_(std::move(core)),
        fv_(std::move(fv)),
        vH_(std::move(vH)),
        baseFam_(core_->base->sons(fv_)) {}

  ClopenSet leafAt(uint64_t i) const override {
    return core_->dropPts(baseFam_->leafAt(i));
  }

  ClopenSet residual(uint64_t n) const override {
    return core_->dropPts(baseFam_->residual(n));
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    return baseFam_->locate(p);
  }

  ClopenSet plainBound() const override {
    return core_->base->plainLeafBound(fv_);
  }

  std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const override {
    auto st = baseFam_->stabilityFromBounds(b);
    if (!st) return std::nullopt;
    // sons carrying a removed point may behave unlike their class
    for (const auto& q : core_->pts)
      if (member(q, plainBound()))
        if (auto idx = baseFam_->locate(q))
          st->bound = std::max(st->bound, *idx + 1);
    return st;
  }

  RefineDecision refines(const ClopenSet& target) const override {
    RefineDecision rd = baseFam_->refines(target);
    if (rd.verdict != Triv::Yes) return rd;
    // a listed exception may fit once its removed points are gone
    RefineDecision out;
    out.verdict = Triv::Yes;
    out.tailFrom = rd.tailFrom;
    out.note = rd.note;
    for (uint64_t e : rd.exceptions)
      if (isSubset(leafAt(e), target) != Triv::Yes) out.exceptions.push_back(e);
    return out;
  }

  Json describe() const override {
    return Json{{"family", "cocountableHost"}, {"tree", core_->term},
                {"path", vH_}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(core_->term, vH_);
  }

 private:
  detail::CocoCorePtr core_;
  NodePath fv_;
  NodePath vH_;
  FamilyPtr baseFam_;
};

/* ----- the tree ----- */

class CocountableTree final : public FoliageTree {
 public:
  CocountableTree(TreePtr base, std::vector<Point> pts) {
    if (!base) throw ConfigError("complement construction needs a base tree");
    if (pts.empty()) throw ConfigError("complement construction needs points");
    auto core = std::make_shared<detail::CocoCore>();
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!pointInSpace(pts[i], base->space()))
        throw SpaceMismatch("removed point lies in another space");
      if (!member(pts[i], base->rootLeaf()))
        throw PointOutsideRoot("removed point lies outside the root leaf");
      for (size_t j = 0; j < i; ++j)
        if (pts[i] == pts[j]) throw DuplicatePoint("removed point listed twice");
    }
    Json arr = Json::array();
    for (const auto& q : pts) arr.push_back(pointToJson(q));
    core->term = Json{{"cocountable", Json{{"base", base->term()},
                                           {"points", std::move(arr)}}}};
    core->base = std::move(base);
    core->pts = std::move(pts);
    buildStages(*core);
    core_ = std::move(core);
  }

  const Space& space() const override { return core_->base->space(); }
  ClopenSet rootLeaf() const override {
    return core_->dropPts(core_->base->rootLeaf());
  }
  Json term() const override { return core_->term; }
  bool certified() const override { return core_->base->certified(); }

  ClopenSet plainLeafBound(const NodePath& v) const override {
    return core_->base->plainLeafBound(core_->toBase(v));
  }

  Json branchProxy(const NodePath& v) const override {
    NodePath fv = core_->toBase(v);
    Json j = core_->base->branchProxy(fv);
    j["stageNode"] = core_->zIndex.count(fv) > 0;
    return j;
  }

  NodePath toBase(const NodePath& v) const { return core_->toBase(v); }
  NodePath fromBase(const NodePath& fv) const { return core_->fromBase(fv); }
  const NodePath& stagePath(size_t i) const { return core_->stages[i].zPath; }
  size_t stageCount() const { return core_->stages.size(); }
  const TreePtr& base() const { return core_->base; }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    NodePath fv = core_->toBase(v);
    auto it = core_->zIndex.find(fv);
    if (it != core_->zIndex.end())
      return std::make_shared<StageFamily>(core_, it->second, v);
    return std::make_shared<HostMinusFamily>(core_, std::move(fv), v);
  }

 private:
  // track, stage by stage, the partition cell whose leaf holds each point
  static void buildStages(detail::CocoCore& core) {
    for (size_t i = 0; i < core.pts.size(); ++i) {
      NodePath w;
      for (size_t j = 0; j < i; ++j) {
        if (w != core.stages[j].zPath) continue;
        // p_i shares the cell of the j-th point: descend to the divergence
        uint64_t t = 0;
        for (;; ++t) {
          if (t > core.walkCap)
            throw PartitionViolation("removed points do not separate in depth");
          auto idx = core.base->sons(core.uAt(j, t))->locate(core.pts[i]);
          if (!idx)
            throw PartitionViolation("scope of a removed point broke during staging");
          if (*idx != core.sAt(j, t)) {
            w = core.uAt(j, t);
            w.push_back(*idx);
            break;
          }
        }
        // the new cell is the son along p_i under the off-branch node
        auto nxt = core.base->sons(w)->locate(core.pts[i]);
        if (!nxt)
          throw PartitionViolation("scope of a removed point broke during staging");
        w.push_back(*nxt);
      }
      core.stages.push_back({core.pts[i], w, {}, {}});
      core.zIndex.emplace(w, i);
    }
  }

  detail::CocoCorePtr core_;
};

// the complement of no points is the tree itself
inline TreePtr cocountableTree(TreePtr base, std::vector<Point> pts) {
  if (pts.empty()) return base;
  return std::make_shared<CocountableTree>(std::move(base), std::move(pts));
}

}  // end of namespace pitree
