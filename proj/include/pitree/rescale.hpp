#pragma once

/****************************************************************************
 * Rescaling a foliage tree along a strictly increasing height map.
 *
 * Every edge of the base tree from a node at height h to one of its sons is
 * stretched into a block of k = alpha(h) - alpha(h-1) edges, with the
 * convention alpha(-1) = -1.  The k-th step of a block picks an actual base
 * son, coded by the tuple of the block's choices; the earlier steps are
 * interior nodes whose leaves are the lazy unions of all base son leaves
 * their partial tuple still allows.  Base nodes thus reappear at height
 * alpha(h-1) + 1, and for k = 1 blocks the construction is the identity.
 *
 * Tuple codes dominate every one of their entries, so a tail verdict of the
 * base family lifts exactly: an exceptional base son disturbs at most one
 * son of each block node, namely the one its decoded tuple passes through.
 ****************************************************************************/

#include <functional>

#include "pitree/tree.hpp"

namespace pitree {

/* ----- the catalog of height maps ----- */

class AlphaMap {
 public:
  static AlphaMap identity() {
    AlphaMap a;
    a.kind_ = Kind::Identity;
    return a;
  }

  static AlphaMap affine2np1() {
    AlphaMap a;
    a.kind_ = Kind::Affine;
    return a;
  }

  static AlphaMap table(std::vector<uint64_t> values, uint64_t tailStep) {
    if (values.empty()) throw ConfigError("table height map needs at least one value");
    for (size_t i = 0; i + 1 < values.size(); ++i)
      if (values[i] >= values[i + 1])
        throw AlphaNotIncreasing("table height map is not strictly increasing");
    if (tailStep == 0)
      throw AlphaNotIncreasing("table height map needs a positive tail step");
    AlphaMap a;
    a.kind_ = Kind::Table;
    a.values_ = std::move(values);
    a.tailStep_ = tailStep;
    return a;
  }

  // wraps an externally produced map; the prefix is validated here
  static AlphaMap fromFn(std::function<int64_t(int64_t)> fn, Json desc,
                         uint64_t probe = 48) {
    if (fn(-1) != -1)
      throw AlphaNotIncreasing("height map must send -1 to -1");
    for (int64_t x = -1; x + 1 < (int64_t)probe; ++x)
      if (fn(x + 1) <= fn(x))
        throw AlphaNotIncreasing("height map is not strictly increasing at " +
                                 std::to_string(x + 1));
    AlphaMap a;
    a.kind_ = Kind::Fn;
    a.fn_ = std::move(fn);
    a.desc_ = std::move(desc);
    return a;
  }

  int64_t at(int64_t x) const {
    if (x < 0) return -1;
    switch (kind_) {
      case Kind::Identity: return x;
      case Kind::Affine: return 2 * x + 1;
      case Kind::Table: {
        if ((uint64_t)x < values_.size()) return (int64_t)values_[(size_t)x];
        return (int64_t)(values_.back() + tailStep_ * ((uint64_t)x + 1 - values_.size()));
      }
      case Kind::Fn: return fn_(x);
    }
    return x;
  }

  uint64_t operator()(uint64_t x) const { return (uint64_t)at((int64_t)x); }

  Json toJson() const {
    switch (kind_) {
      case Kind::Identity: return Json{{"identity", Json::object()}};
      case Kind::Affine: return Json{{"affine2np1", Json::object()}};
      case Kind::Table:
        return Json{{"table", Json{{"values", values_}, {"tailStep", tailStep_}}}};
      case Kind::Fn: return desc_;
    }
    return Json();
  }

  static AlphaMap fromJson(const Json& j) {
    if (!j.is_object() || j.size() != 1)
      throw ConfigError("malformed height map: " + j.dump());
    if (j.contains("identity")) return identity();
    if (j.contains("affine2np1")) return affine2np1();
    if (j.contains("table"))
      return table(j.at("table").at("values").get<std::vector<uint64_t>>(),
                   j.at("table").at("tailStep").get<uint64_t>());
    throw ConfigError("unknown height map form: " + j.dump());
  }

 private:
  enum class Kind : uint8_t { Identity, Affine, Table, Fn };
  Kind kind_ = Kind::Identity;
  std::vector<uint64_t> values_;
  uint64_t tailStep_ = 1;
  std::function<int64_t(int64_t)> fn_;
  Json desc_;
};

/* ----- shared state and path decoding ----- */

namespace detail {

struct RescaleCore {
  TreePtr base;
  AlphaMap alpha;
  Json term;

  // block length for the edges leaving a base node of the given height
  uint64_t kAt(uint64_t h) const {
    int64_t k = alpha.at((int64_t)h) - alpha.at((int64_t)h - 1);
    if (k <= 0)
      throw AlphaNotIncreasing("height map is not strictly increasing at " +
                               std::to_string(h));
    return (uint64_t)k;
  }
};

using RescaleCorePtr = std::shared_ptr<const RescaleCore>;

// a node of the rescaled tree: the base node reached so far plus the
// partial tuple inside the current block (empty exactly at base nodes)
struct RescalePos {
  NodePath v;
  std::vector<uint64_t> u;
};

inline RescalePos decodeRescalePath(const RescaleCore& core, const NodePath& vH) {
  RescalePos pos;
  uint64_t k = core.kAt(0);
  for (uint64_t e : vH) {
    if (pos.u.size() + 1 < k) {
      pos.u.push_back(e);
      continue;
    }
    auto w = pos.u;
    w.push_back(e);
    pos.v.push_back(tupleEnc(w));
    pos.u.clear();
    k = core.kAt(pos.v.size());
  }
  return pos;
}

// a yes verdict of the base family, pushed through one block position: an
// exceptional base son touches the son its decoded tuple passes through
inline RefineDecision liftDecision(const RefineDecision& rd,
                                   const std::vector<uint64_t>& u, uint64_t k) {
  if (rd.verdict == Triv::No) {
    RefineDecision out;
    out.verdict = Triv::Unknown;
    out.note = "base sons already escape the target";
    return out;
  }
  if (rd.verdict != Triv::Yes) return rd;
  RefineDecision out;
  out.verdict = Triv::Yes;
  out.tailFrom = rd.tailFrom;  // a code dominates its entries
  out.note = rd.note;
  for (uint64_t e : rd.exceptions) {
    auto w = tupleDec(e, (uint32_t)k);
    bool onBranch = true;
    for (size_t i = 0; i < u.size() && onBranch; ++i) onBranch = w[i] == u[i];
    if (onBranch) out.exceptions.push_back(w[u.size()]);
  }
  std::sort(out.exceptions.begin(), out.exceptions.end());
  out.exceptions.erase(std::unique(out.exceptions.begin(), out.exceptions.end()),
                       out.exceptions.end());
  return out;
}

}  // end of namespace detail

/* ----- son families inside a block ----- */

// a node strictly inside a block: sons extend the partial tuple
class GraftInteriorFamily final : public SonFamily {
 public:
  GraftInteriorFamily(detail::RescaleCorePtr core, NodePath vH, detail::RescalePos pos,
                      uint64_t k)
      : core_(std::move(core)),
        vH_(std::move(vH)),
        pos_(std::move(pos)),
        k_(k),
        baseFam_(core_->base->sons(pos_.v)) {}

  ClopenSet leafAt(uint64_t i) const override {
    Fiber f;
    f.k = (uint32_t)k_;
    f.prefix = pos_.u;
    f.prefix.push_back(i);
    f.normalize();
    return ClopenSet::sonsUnion(baseFam_, std::move(f));
  }

  ClopenSet residual(uint64_t n) const override {
    Fiber f;
    f.k = (uint32_t)k_;
    f.prefix = pos_.u;
    f.minNext = n;
    f.normalize();
    return ClopenSet::sonsUnion(baseFam_, std::move(f));
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    auto s = baseFam_->locate(p);
    if (!s) return std::nullopt;
    auto w = tupleDec(*s, (uint32_t)k_);
    for (size_t i = 0; i < pos_.u.size(); ++i)
      if (w[i] != pos_.u[i]) return std::nullopt;
    return w[pos_.u.size()];
  }

  ClopenSet plainBound() const override {
    return core_->base->plainLeafBound(pos_.v);
  }

  RefineDecision refines(const ClopenSet& target) const override {
    return detail::liftDecision(baseFam_->refines(target), pos_.u, k_);
  }

  Json describe() const override {
    return Json{{"family", "graftInterior"}, {"tree", core_->term},
                {"path", vH_}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(core_->term, vH_);
  }

 private:
  detail::RescaleCorePtr core_;
  NodePath vH_;
  detail::RescalePos pos_;
  uint64_t k_;
  FamilyPtr baseFam_;
};

// the last node of a block: sons complete the tuple and land on base sons
class GraftLastFamily final : public SonFamily {
 public:
  GraftLastFamily(detail::RescaleCorePtr core, NodePath vH, detail::RescalePos pos,
                  uint64_t k)
      : core_(std::move(core)),
        vH_(std::move(vH)),
        pos_(std::move(pos)),
        k_(k),
        baseFam_(core_->base->sons(pos_.v)) {}

  ClopenSet leafAt(uint64_t i) const override {
    auto w = pos_.u;
    w.push_back(i);
    return baseFam_->leafAt(tupleEnc(w));
  }

  ClopenSet residual(uint64_t n) const override {
    if (k_ == 1) return baseFam_->residual(n);
    Fiber f;
    f.k = (uint32_t)k_;
    f.prefix = pos_.u;
    f.minNext = n;
    f.normalize();
    return ClopenSet::sonsUnion(baseFam_, std::move(f));
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    auto s = baseFam_->locate(p);
    if (!s) return std::nullopt;
    auto w = tupleDec(*s, (uint32_t)k_);
    for (size_t i = 0; i < pos_.u.size(); ++i)
      if (w[i] != pos_.u[i]) return std::nullopt;
    return w.back();
  }

  ClopenSet plainBound() const override {
    return core_->base->plainLeafBound(pos_.v);
  }

  RefineDecision refines(const ClopenSet& target) const override {
    if (k_ == 1) return baseFam_->refines(target);
    return detail::liftDecision(baseFam_->refines(target), pos_.u, k_);
  }

  Json describe() const override {
    return Json{{"family", "graftLast"}, {"tree", core_->term}, {"path", vH_}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(core_->term, vH_);
  }

 private:
  detail::RescaleCorePtr core_;
  NodePath vH_;
  detail::RescalePos pos_;
  uint64_t k_;
  FamilyPtr baseFam_;
};

/* ----- the rescaled tree ----- */

class RescaleTree final : public FoliageTree {
 public:
  RescaleTree(TreePtr base, AlphaMap alpha) {
    if (!base) throw ConfigError("rescale needs a base tree");
    auto core = std::make_shared<detail::RescaleCore>();
    core->term = Json{{"rescale", Json{{"base", base->term()},
                                       {"alpha", alpha.toJson()}}}};
    core->base = std::move(base);
    core->alpha = std::move(alpha);
    core->kAt(0);  // surface non-increasing maps right away
    core_ = std::move(core);
  }

  const Space& space() const override { return core_->base->space(); }
  ClopenSet rootLeaf() const override { return core_->base->rootLeaf(); }
  Json term() const override { return core_->term; }
  bool certified() const override { return core_->base->certified(); }

  ClopenSet plainLeafBound(const NodePath& v) const override {
    auto pos = detail::decodeRescalePath(*core_, v);
    return core_->base->plainLeafBound(pos.v);
  }

  Json branchProxy(const NodePath& v) const override {
    auto pos = detail::decodeRescalePath(*core_, v);
    Json j = core_->base->branchProxy(pos.v);
    j["blockPosition"] = pos.u.size();
    j["blockLength"] = core_->kAt(pos.v.size());
    return j;
  }

  // where a base node reappears: its blocks spelled out edge by edge
  NodePath rescaledPathOf(const NodePath& baseNode) const {
    NodePath out;
    for (size_t j = 0; j < baseNode.size(); ++j) {
      auto w = tupleDec(baseNode[j], (uint32_t)core_->kAt(j));
      out.insert(out.end(), w.begin(), w.end());
    }
    return out;
  }

  const AlphaMap& alphaMap() const { return core_->alpha; }
  const TreePtr& base() const { return core_->base; }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    auto pos = detail::decodeRescalePath(*core_, v);
    uint64_t k = core_->kAt(pos.v.size());
    if (pos.u.size() + 1 < k)
      return std::make_shared<GraftInteriorFamily>(core_, v, std::move(pos), k);
    return std::make_shared<GraftLastFamily>(core_, v, std::move(pos), k);
  }

 private:
  detail::RescaleCorePtr core_;
};

inline TreePtr rescaleTree(TreePtr base, AlphaMap alpha) {
  return std::make_shared<RescaleTree>(std::move(base), std::move(alpha));
}

}  // end of namespace pitree
