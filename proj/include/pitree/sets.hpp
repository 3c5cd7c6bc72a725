#pragma once

/****************************************************************************
 * Clopen set algebra.
 *
 * Sets are immutable symbolic descriptions: Baire cylinders and tail
 * cylinders, Sorgenfrey half open intervals, finite support boxes, disjoint
 * finite unions, a base set minus finitely many points, and lazy unions of
 * son leaves selected by a coded fiber.  Membership is always exact;
 * subset, intersection and difference are exact on everything the built in
 * constructions produce and return "unknown" instead of guessing on
 * anything else.
 ****************************************************************************/

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pitree/common.hpp"
#include "pitree/point.hpp"
#include "pitree/rational.hpp"

namespace pitree {

class SonFamily;
using FamilyPtr = std::shared_ptr<const SonFamily>;

/* ----- fibers: coded subsets of ^k(omega) ----- */

// selects the tuples w of length k with prefix <= w whose next entry (when
// the prefix is proper) is >= minNext and not in omitNext
struct Fiber {
  uint32_t k = 1;
  std::vector<uint64_t> prefix;
  uint64_t minNext = 0;
  std::vector<uint64_t> omitNext;  // sorted, distinct, all >= minNext

  void normalize() {
    if (prefix.size() > k) throw ArityZero("fiber prefix longer than arity");
    std::sort(omitNext.begin(), omitNext.end());
    omitNext.erase(std::unique(omitNext.begin(), omitNext.end()), omitNext.end());
    omitNext.erase(std::remove_if(omitNext.begin(), omitNext.end(),
                                  [&](uint64_t x) { return x < minNext; }),
                   omitNext.end());
    while (!omitNext.empty() && omitNext.front() == minNext) {
      omitNext.erase(omitNext.begin());
      ++minNext;
    }
    if (prefix.size() == k) {
      minNext = 0;
      omitNext.clear();
    }
  }

  bool isSingleton() const { return prefix.size() == k; }

  bool nextAllowed(uint64_t x) const {
    if (x < minNext) return false;
    return !std::binary_search(omitNext.begin(), omitNext.end(), x);
  }

  bool containsTuple(const std::vector<uint64_t>& w) const {
    if (w.size() != k) return false;
    for (size_t i = 0; i < prefix.size(); ++i)
      if (w[i] != prefix[i]) return false;
    if (prefix.size() < k) return nextAllowed(w[prefix.size()]);
    return true;
  }

  bool containsIndex(uint64_t idx) const { return containsTuple(tupleDec(idx, k)); }

  // indices below the bound, in increasing order; enc dominates every entry,
  // so an odometer over entries < bound is exhaustive
  std::vector<uint64_t> indicesBelow(uint64_t bound) const {
    std::vector<uint64_t> out;
    for (uint64_t idx = 0; idx < bound; ++idx)
      if (containsIndex(idx)) out.push_back(idx);
    return out;
  }

  Json toJson() const {
    return Json{{"k", k}, {"prefix", prefix}, {"minNext", minNext}, {"omitNext", omitNext}};
  }

  bool operator==(const Fiber& o) const {
    return k == o.k && prefix == o.prefix && minNext == o.minNext && omitNext == o.omitNext;
  }
};

/* ----- fiber relations (same arity) ----- */

enum class FiberRel { Equal, Subset, Superset, Disjoint, Overlap };

inline FiberRel fiberRelate(const Fiber& a, const Fiber& b) {
  if (a.k != b.k) throw ArityZero("fiber arity mismatch");
  size_t n = std::min(a.prefix.size(), b.prefix.size());
  for (size_t i = 0; i < n; ++i)
    if (a.prefix[i] != b.prefix[i]) return FiberRel::Disjoint;
  if (a.prefix.size() == b.prefix.size()) {
    // same position constraints; allowed sets are cofinite, never disjoint
    auto subs = [](const Fiber& x, const Fiber& y) {
      if (x.isSingleton()) return true;
      if (x.minNext < y.minNext) return false;
      for (uint64_t v : y.omitNext)
        if (v >= x.minNext && x.nextAllowed(v)) return false;
      return true;
    };
    bool ab = subs(a, b), ba = subs(b, a);
    if (ab && ba) return FiberRel::Equal;
    if (ab) return FiberRel::Subset;
    if (ba) return FiberRel::Superset;
    return FiberRel::Overlap;
  }
  const Fiber& up = a.prefix.size() < b.prefix.size() ? a : b;
  const Fiber& dn = a.prefix.size() < b.prefix.size() ? b : a;
  bool dnInside = up.isSingleton() || up.nextAllowed(dn.prefix[up.prefix.size()]);
  if (!dnInside) return FiberRel::Disjoint;
  return (&dn == &a) ? FiberRel::Subset : FiberRel::Superset;
}

// pieces of a \ b as disjoint fibers; always representable
inline std::vector<Fiber> fiberDiff(const Fiber& a, const Fiber& b) {
  switch (fiberRelate(a, b)) {
    case FiberRel::Equal:
    case FiberRel::Subset: return {};
    case FiberRel::Disjoint: return {a};
    default: break;
  }
  std::vector<Fiber> out;
  auto pushFiber = [&](Fiber f) {
    f.normalize();
    out.push_back(std::move(f));
  };
  if (a.prefix.size() == b.prefix.size()) {
    // allowed(a) minus allowed(b) is finite: x < b.minNext or x omitted by b
    for (uint64_t x = a.minNext; x < b.minNext; ++x)
      if (a.nextAllowed(x)) {
        Fiber f = a;
        f.prefix.push_back(x);
        f.minNext = 0;
        f.omitNext.clear();
        pushFiber(std::move(f));
      }
    for (uint64_t x : b.omitNext)
      if (a.nextAllowed(x)) {
        Fiber f = a;
        f.prefix.push_back(x);
        f.minNext = 0;
        f.omitNext.clear();
        pushFiber(std::move(f));
      }
    return out;
  }
  // here a.prefix is a proper prefix of b.prefix and b sits in an allowed branch
  {
    Fiber f = a;
    f.omitNext.push_back(b.prefix[a.prefix.size()]);
    pushFiber(std::move(f));
  }
  for (size_t j = a.prefix.size() + 1; j < b.prefix.size(); ++j) {
    Fiber f;
    f.k = a.k;
    f.prefix.assign(b.prefix.begin(), b.prefix.begin() + j);
    f.omitNext = {b.prefix[j]};
    pushFiber(std::move(f));
  }
  if (!b.isSingleton()) {
    // entries at b's constrained position that b excludes
    for (uint64_t x = 0; x < b.minNext; ++x) {
      Fiber f;
      f.k = a.k;
      f.prefix = b.prefix;
      f.prefix.push_back(x);
      pushFiber(std::move(f));
    }
    for (uint64_t x : b.omitNext) {
      Fiber f;
      f.k = a.k;
      f.prefix = b.prefix;
      f.prefix.push_back(x);
      pushFiber(std::move(f));
    }
  }
  return out;
}

inline std::optional<Fiber> fiberIntersect(const Fiber& a, const Fiber& b) {
  switch (fiberRelate(a, b)) {
    case FiberRel::Disjoint: return std::nullopt;
    case FiberRel::Equal:
    case FiberRel::Subset: return a;
    case FiberRel::Superset: return b;
    default: {
      Fiber f = a;
      f.minNext = std::max(a.minNext, b.minNext);
      f.omitNext.insert(f.omitNext.end(), b.omitNext.begin(), b.omitNext.end());
      f.normalize();
      return f;
    }
  }
}

/* ----- clopen sets ----- */

namespace detail {
struct SetNode;
}

struct SetWithPoints;
struct Bounds;

class ClopenSet {
 public:
  enum class Kind : uint8_t { Empty, Cyl, TailCyl, SorgIv, Box, Union, Minus, SonsUnion };

  ClopenSet() = default;  // empty set over Baire space

  static ClopenSet empty(Space sp);
  static ClopenSet cyl(NodePath path);
  static ClopenSet tailCyl(NodePath path, uint64_t from);
  static ClopenSet sorgIv(std::optional<Rat> lo, std::optional<Rat> hi);
  static ClopenSet box(Space sp, std::map<size_t, ClopenSet> support);
  static ClopenSet finUnion(Space sp, std::vector<ClopenSet> parts);
  static ClopenSet minus(ClopenSet base, std::vector<Point> pts);
  static ClopenSet sonsUnion(FamilyPtr fam, Fiber fiber);
  static ClopenSet full(const Space& sp);

  Kind kind() const;
  const Space& space() const;
  bool isEmptySet() const { return kind() == Kind::Empty; }
  bool isFullSet() const;

  // structural accessors, valid for the matching kind only
  const NodePath& path() const;
  uint64_t from() const;
  const std::optional<Rat>& lo() const;
  const std::optional<Rat>& hi() const;
  const std::map<size_t, ClopenSet>& support() const;
  ClopenSet factorAt(size_t i) const;  // box factor, full when absent
  const std::vector<ClopenSet>& parts() const;
  const ClopenSet& base() const;
  const std::vector<Point>& removedPoints() const;
  const FamilyPtr& family() const;
  const Fiber& fiber() const;

  Json toJson() const;
  std::string key() const { return toJson().dump(); }
  bool sameShape(const ClopenSet& o) const { return key() == o.key(); }

 private:
  explicit ClopenSet(std::shared_ptr<const detail::SetNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::SetNode> node_;
};

namespace detail {
struct SetNode {
  ClopenSet::Kind kind = ClopenSet::Kind::Empty;
  Space space;
  NodePath path;                        // Cyl, TailCyl
  uint64_t from = 0;                    // TailCyl
  std::optional<Rat> lo, hi;            // SorgIv
  std::map<size_t, ClopenSet> support;  // Box
  std::vector<ClopenSet> parts;         // Union
  std::optional<ClopenSet> base;        // Minus
  std::vector<Point> pts;               // Minus
  FamilyPtr fam;                        // SonsUnion
  Fiber fib;                            // SonsUnion
};
}  // end of namespace detail

/* ----- forward declarations of the query layer ----- */

bool member(const Point& p, const ClopenSet& a);
Triv isSubset(const ClopenSet& a, const ClopenSet& b);
Triv areDisjoint(const ClopenSet& a, const ClopenSet& b);
std::optional<ClopenSet> intersection(const ClopenSet& a, const ClopenSet& b);
std::optional<SetWithPoints> difference(const ClopenSet& a, const ClopenSet& b);
Triv equalSets(const ClopenSet& a, const ClopenSet& b);
Point samplePoint(const ClopenSet& a);
Point samplePointAvoiding(const ClopenSet& a, const std::vector<Point>& avoid);
ClopenSet setFromJson(const Space& sp, const Json& j);

// difference results may pick up isolated points (removing a punctured set
// puts the punctures back); core never contains any of plus
struct SetWithPoints {
  ClopenSet core;
  std::vector<Point> plus;
  bool isEmpty() const { return core.isEmptySet() && plus.empty(); }
};

/* ----- numeric bounds harvested from a set description ----- */

struct Bounds {
  uint64_t maxNat = 0;               // Baire entries, tail thresholds
  std::optional<Rat> maxAbs;         // Sorgenfrey endpoint magnitudes
  std::vector<Rat> endpoints;        // all finite Sorgenfrey endpoints
  bool opaque = false;               // set contains a lazy family union

  void takeNat(uint64_t v) { maxNat = std::max(maxNat, v); }
  void takeRat(const Rat& r) {
    endpoints.push_back(r);
    Rat a = r < Rat(0) ? -r : r;
    if (!maxAbs || *maxAbs < a) maxAbs = a;
  }
};

inline void collectPointBounds(const Point& p, Bounds& b) {
  if (std::holds_alternative<BairePoint>(p.v)) {
    for (uint64_t e : p.baire().prefix) b.takeNat(e);
    b.takeNat(p.baire().tail);
  } else if (std::holds_alternative<SorgPoint>(p.v)) {
    b.takeRat(p.sorg().value);
  } else {
    for (const auto& c : p.prod().coords) collectPointBounds(c, b);
    if (p.prod().tailTemplate) collectPointBounds(*p.prod().tailTemplate, b);
  }
}

inline void collectBounds(const ClopenSet& a, Bounds& b) {
  switch (a.kind()) {
    case ClopenSet::Kind::Empty: return;
    case ClopenSet::Kind::Cyl:
      for (uint64_t e : a.path()) b.takeNat(e);
      return;
    case ClopenSet::Kind::TailCyl:
      for (uint64_t e : a.path()) b.takeNat(e);
      b.takeNat(a.from());
      return;
    case ClopenSet::Kind::SorgIv:
      if (a.lo()) b.takeRat(*a.lo());
      if (a.hi()) b.takeRat(*a.hi());
      return;
    case ClopenSet::Kind::Box:
      for (const auto& [i, f] : a.support()) collectBounds(f, b);
      return;
    case ClopenSet::Kind::Union:
      for (const auto& p : a.parts()) collectBounds(p, b);
      return;
    case ClopenSet::Kind::Minus:
      collectBounds(a.base(), b);
      for (const auto& q : a.removedPoints()) collectPointBounds(q, b);
      return;
    default: b.opaque = true; return;
  }
}

inline Bounds boundsOf(const ClopenSet& a) {
  Bounds b;
  collectBounds(a, b);
  return b;
}

/* ----- son families ----- */

struct StabilityInfo {
  uint64_t bound = 0;   // item relations to the probed set are classwise
  uint32_t period = 1;  // constant from bound on, per residue class
};

struct RefineDecision {
  Triv verdict = Triv::Unknown;
  uint64_t tailFrom = 0;             // yes: every index >= tailFrom works
  std::vector<uint64_t> exceptions;  // yes: failing indices below tailFrom
  std::vector<uint64_t> witnesses;   // no: sample failing indices, one per class
  std::string note;
};

// lazily enumerated sons of one tree node; leafAt(i) are pairwise disjoint
// nonempty sets and residual(n) is exactly the union of leaves from n on
class SonFamily : public std::enable_shared_from_this<SonFamily> {
 public:
  virtual ~SonFamily() = default;

  virtual ClopenSet leafAt(uint64_t i) const = 0;
  virtual ClopenSet residual(uint64_t n) const = 0;
  virtual uint64_t explicitCount() const { return 0; }
  virtual std::optional<uint64_t> locate(const Point& p) const = 0;
  virtual ClopenSet plainBound() const = 0;  // lazy-free superset of the union
  // classwise-constant tail for item relations against any set with the
  // given numeric bounds; nullopt when the family cannot promise one
  virtual std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const {
    (void)b;
    return std::nullopt;
  }
  std::optional<StabilityInfo> stability(const ClopenSet& probe) const {
    Bounds b = boundsOf(probe);
    if (b.opaque) return std::nullopt;
    return stabilityFromBounds(b);
  }
  virtual RefineDecision refines(const ClopenSet& target) const;
  virtual Json describe() const = 0;
  // identity of the node whose sons these are: (tree term, node path)
  virtual std::optional<std::pair<Json, NodePath>> hostKey() const { return std::nullopt; }

  bool sameFamilyAs(const SonFamily& o) const { return describe() == o.describe(); }
};

/* ----- clopen set construction ----- */

inline ClopenSet ClopenSet::empty(Space sp) {
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::Empty;
  n->space = std::move(sp);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::cyl(NodePath path) {
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::Cyl;
  n->space = Space::baire();
  n->path = std::move(path);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::tailCyl(NodePath path, uint64_t from) {
  if (from == 0) return cyl(std::move(path));
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::TailCyl;
  n->space = Space::baire();
  n->path = std::move(path);
  n->from = from;
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::sorgIv(std::optional<Rat> lo, std::optional<Rat> hi) {
  if (lo && hi && !(*lo < *hi)) return empty(Space::sorg());
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::SorgIv;
  n->space = Space::sorg();
  n->lo = std::move(lo);
  n->hi = std::move(hi);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::full(const Space& sp) {
  switch (sp.kind) {
    case SpaceKind::Baire: return cyl({});
    case SpaceKind::Sorg: return sorgIv(std::nullopt, std::nullopt);
    default: return box(sp, {});
  }
}

inline ClopenSet ClopenSet::box(Space sp, std::map<size_t, ClopenSet> support) {
  if (sp.kind != SpaceKind::Product) throw SpaceMismatch("box needs a product space");
  std::map<size_t, ClopenSet> kept;
  for (auto& [i, f] : support) {
    if (sp.lambda && i >= *sp.lambda) throw SpaceMismatch("box coordinate out of range");
    if (f.space() != sp.factorAt(i)) throw SpaceMismatch("box factor space mismatch");
    if (f.isEmptySet()) return empty(std::move(sp));
    if (f.isFullSet()) continue;
    kept.emplace(i, std::move(f));
  }
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::Box;
  n->space = std::move(sp);
  n->support = std::move(kept);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::finUnion(Space sp, std::vector<ClopenSet> parts) {
  std::vector<ClopenSet> flat;
  for (auto& p : parts) {
    if (p.space() != sp) throw SpaceMismatch("union part space mismatch");
    if (p.isEmptySet()) continue;
    if (p.kind() == Kind::Union)
      for (const auto& q : p.parts()) flat.push_back(q);
    else
      flat.push_back(std::move(p));
  }
  if (flat.empty()) return empty(std::move(sp));
  if (flat.size() == 1) return flat[0];
  for (size_t i = 0; i < flat.size(); ++i)
    for (size_t j = i + 1; j < flat.size(); ++j) {
      Triv d = areDisjoint(flat[i], flat[j]);
      if (d == Triv::No)
        throw PartitionViolation("union parts overlap: " + flat[i].key() + " and " +
                                 flat[j].key());
      if (d == Triv::Unknown)
        throw PartitionViolation("union part disjointness undecidable");
    }
  std::sort(flat.begin(), flat.end(),
            [](const ClopenSet& a, const ClopenSet& b) { return a.key() < b.key(); });
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::Union;
  n->space = std::move(sp);
  n->parts = std::move(flat);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::minus(ClopenSet base, std::vector<Point> pts) {
  // fold nested removals, keep only points actually in the base, dedup
  std::vector<Point> kept;
  if (base.kind() == Kind::Minus) {
    kept = base.removedPoints();
    base = base.base();
  }
  for (auto& q : pts) {
    if (!member(q, base)) continue;
    bool dup = false;
    for (const auto& r : kept)
      if (r == q) dup = true;
    if (!dup) kept.push_back(std::move(q));
  }
  if (kept.empty()) return base;
  if (base.kind() == Kind::Union) {
    // push removals into the unique part containing each point
    std::vector<ClopenSet> out;
    for (const auto& part : base.parts()) {
      std::vector<Point> mine;
      for (const auto& q : kept)
        if (member(q, part)) mine.push_back(q);
      out.push_back(mine.empty() ? part : minus(part, std::move(mine)));
    }
    Space sp = base.space();
    return finUnion(std::move(sp), std::move(out));
  }
  std::sort(kept.begin(), kept.end(), [](const Point& a, const Point& b) {
    return pointToJson(a).dump() < pointToJson(b).dump();
  });
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::Minus;
  n->space = base.space();
  n->base = std::move(base);
  n->pts = std::move(kept);
  return ClopenSet(std::move(n));
}

inline ClopenSet ClopenSet::sonsUnion(FamilyPtr fam, Fiber fiber) {
  fiber.normalize();
  if (fiber.isSingleton()) return fam->leafAt(tupleEnc(fiber.prefix));
  if (fiber.prefix.empty() && fiber.minNext == 0 && fiber.omitNext.empty())
    return fam->residual(0);
  auto n = std::make_shared<detail::SetNode>();
  n->kind = Kind::SonsUnion;
  n->space = fam->plainBound().space();
  n->fam = std::move(fam);
  n->fib = std::move(fiber);
  return ClopenSet(std::move(n));
}

/* ----- accessors ----- */

inline ClopenSet::Kind ClopenSet::kind() const {
  return node_ ? node_->kind : Kind::Empty;
}

inline const Space& ClopenSet::space() const {
  static const Space baire = Space::baire();
  return node_ ? node_->space : baire;
}

inline bool ClopenSet::isFullSet() const {
  switch (kind()) {
    case Kind::Cyl: return path().empty();
    case Kind::SorgIv: return !lo() && !hi();
    case Kind::Box: return support().empty();
    default: return false;
  }
}

inline const NodePath& ClopenSet::path() const { return node_->path; }
inline uint64_t ClopenSet::from() const { return node_->from; }
inline const std::optional<Rat>& ClopenSet::lo() const { return node_->lo; }
inline const std::optional<Rat>& ClopenSet::hi() const { return node_->hi; }
inline const std::map<size_t, ClopenSet>& ClopenSet::support() const { return node_->support; }
inline const std::vector<ClopenSet>& ClopenSet::parts() const { return node_->parts; }
inline const ClopenSet& ClopenSet::base() const { return *node_->base; }
inline const std::vector<Point>& ClopenSet::removedPoints() const { return node_->pts; }
inline const FamilyPtr& ClopenSet::family() const { return node_->fam; }
inline const Fiber& ClopenSet::fiber() const { return node_->fib; }

inline ClopenSet ClopenSet::factorAt(size_t i) const {
  auto it = support().find(i);
  if (it != support().end()) return it->second;
  return full(space().factorAt(i));
}

/* ----- json ----- */

inline Json ClopenSet::toJson() const {
  switch (kind()) {
    case Kind::Empty: return Json{{"empty", true}};
    case Kind::Cyl: return Json{{"cyl", path()}};
    case Kind::TailCyl: return Json{{"tailCyl", {{"path", path()}, {"from", from()}}}};
    case Kind::SorgIv: {
      Json j;
      j["sorgIv"]["lo"] = lo() ? Json(ratToString(*lo())) : Json(nullptr);
      j["sorgIv"]["hi"] = hi() ? Json(ratToString(*hi())) : Json(nullptr);
      return j;
    }
    case Kind::Box: {
      Json m = Json::object();
      for (const auto& [i, f] : support()) m[std::to_string(i)] = f.toJson();
      return Json{{"box", m}};
    }
    case Kind::Union: {
      Json a = Json::array();
      for (const auto& p : parts()) a.push_back(p.toJson());
      return Json{{"union", a}};
    }
    case Kind::Minus: {
      Json a = Json::array();
      for (const auto& q : removedPoints()) a.push_back(pointToJson(q));
      return Json{{"minus", {{"base", base().toJson()}, {"points", a}}}};
    }
    default:
      return Json{{"sonsUnion", {{"family", family()->describe()}, {"fiber", fiber().toJson()}}}};
  }
}

inline ClopenSet setFromJson(const Space& sp, const Json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("malformed set: " + j.dump());
  if (j.contains("empty")) return ClopenSet::empty(sp);
  if (j.contains("cyl")) {
    if (sp.kind != SpaceKind::Baire) throw ConfigError("cyl outside Baire space");
    return ClopenSet::cyl(j.at("cyl").get<NodePath>());
  }
  if (j.contains("tailCyl")) {
    if (sp.kind != SpaceKind::Baire) throw ConfigError("tailCyl outside Baire space");
    return ClopenSet::tailCyl(j.at("tailCyl").at("path").get<NodePath>(),
                              j.at("tailCyl").at("from").get<uint64_t>());
  }
  if (j.contains("sorgIv")) {
    if (sp.kind != SpaceKind::Sorg) throw ConfigError("sorgIv outside Sorgenfrey space");
    auto ep = [&](const char* k) -> std::optional<Rat> {
      const auto& e = j.at("sorgIv").at(k);
      if (e.is_null()) return std::nullopt;
      return parseRat(e.is_string() ? e.get<std::string>() : e.dump());
    };
    return ClopenSet::sorgIv(ep("lo"), ep("hi"));
  }
  if (j.contains("box")) {
    if (sp.kind != SpaceKind::Product) throw ConfigError("box outside product space");
    std::map<size_t, ClopenSet> sup;
    for (const auto& [k, v] : j.at("box").items()) {
      size_t i = std::stoull(k);
      sup.emplace(i, setFromJson(sp.factorAt(i), v));
    }
    return ClopenSet::box(sp, std::move(sup));
  }
  if (j.contains("union")) {
    std::vector<ClopenSet> ps;
    for (const auto& e : j.at("union")) ps.push_back(setFromJson(sp, e));
    return ClopenSet::finUnion(sp, std::move(ps));
  }
  if (j.contains("minus")) {
    std::vector<Point> pts;
    for (const auto& e : j.at("minus").at("points")) pts.push_back(pointFromJson(e));
    return ClopenSet::minus(setFromJson(sp, j.at("minus").at("base")), std::move(pts));
  }
  if (j.contains("sonsUnion"))
    throw ConfigError("sonsUnion sets are produced by constructions, not composed");
  throw ConfigError("unknown set kind: " + j.dump());
}

/* ----- membership ----- */

inline bool member(const Point& p, const ClopenSet& a) {
  if (!pointInSpace(p, a.space())) throw SpaceMismatch("point not in the set's space");
  switch (a.kind()) {
    case ClopenSet::Kind::Empty: return false;
    case ClopenSet::Kind::Cyl: {
      const auto& u = a.path();
      for (size_t i = 0; i < u.size(); ++i)
        if (p.baire().at(i) != u[i]) return false;
      return true;
    }
    case ClopenSet::Kind::TailCyl: {
      const auto& u = a.path();
      for (size_t i = 0; i < u.size(); ++i)
        if (p.baire().at(i) != u[i]) return false;
      return p.baire().at(u.size()) >= a.from();
    }
    case ClopenSet::Kind::SorgIv: {
      const Rat& v = p.sorg().value;
      if (a.lo() && v < *a.lo()) return false;
      if (a.hi() && !(v < *a.hi())) return false;
      return true;
    }
    case ClopenSet::Kind::Box: {
      for (const auto& [i, f] : a.support())
        if (!member(p.prod().at(i), f)) return false;
      return true;
    }
    case ClopenSet::Kind::Union: {
      for (const auto& q : a.parts())
        if (member(p, q)) return true;
      return false;
    }
    case ClopenSet::Kind::Minus: {
      for (const auto& q : a.removedPoints())
        if (q == p) return false;
      return member(p, a.base());
    }
    default: {
      if (!member(p, a.family()->plainBound())) return false;
      auto idx = a.family()->locate(p);
      if (!idx) return false;
      return a.fiber().containsIndex(*idx);
    }
  }
}

/* ----- baire atom calculus ----- */

namespace detail {

// pieces of Cyl(u) \ Cyl(v), disjoint atoms
inline void cylMinusCyl(const NodePath& u, const NodePath& v, std::vector<ClopenSet>& out) {
  if (isPrefixOf(v, u)) return;
  if (!isPrefixOf(u, v)) {
    out.push_back(ClopenSet::cyl(u));
    return;
  }
  for (size_t j = u.size(); j < v.size(); ++j) {
    NodePath w(v.begin(), v.begin() + j);
    out.push_back(ClopenSet::tailCyl(w, v[j] + 1));
    for (uint64_t l = 0; l < v[j]; ++l) {
      NodePath wl = w;
      wl.push_back(l);
      out.push_back(ClopenSet::cyl(wl));
    }
  }
}

inline void cylMinusTail(const NodePath& u, const NodePath& v, uint64_t m,
                         std::vector<ClopenSet>& out) {
  if (isPrefixOf(u, v)) {
    cylMinusCyl(u, v, out);
    for (uint64_t l = 0; l < m; ++l) {
      NodePath w = v;
      w.push_back(l);
      out.push_back(ClopenSet::cyl(w));
    }
    return;
  }
  if (isPrefixOf(v, u) && u.size() > v.size()) {
    if (u[v.size()] >= m) return;  // swallowed
    out.push_back(ClopenSet::cyl(u));
    return;
  }
  out.push_back(ClopenSet::cyl(u));
}

inline void tailMinusCyl(const NodePath& u, uint64_t m, const NodePath& v,
                         std::vector<ClopenSet>& out) {
  if (isPrefixOf(v, u)) return;
  if (!isPrefixOf(u, v) || v.size() == u.size()) {
    out.push_back(ClopenSet::tailCyl(u, m));
    return;
  }
  uint64_t l = v[u.size()];
  if (l < m) {
    out.push_back(ClopenSet::tailCyl(u, m));
    return;
  }
  out.push_back(ClopenSet::tailCyl(u, l + 1));
  for (uint64_t t = m; t < l; ++t) {
    NodePath w = u;
    w.push_back(t);
    out.push_back(ClopenSet::cyl(w));
  }
  NodePath branch = u;
  branch.push_back(l);
  cylMinusCyl(branch, v, out);
}

inline void tailMinusTail(const NodePath& u, uint64_t m1, const NodePath& v, uint64_t m2,
                          std::vector<ClopenSet>& out) {
  if (u == v) {
    for (uint64_t t = m1; t < m2; ++t) {
      NodePath w = u;
      w.push_back(t);
      out.push_back(ClopenSet::cyl(w));
    }
    return;
  }
  if (isPrefixOf(u, v)) {
    uint64_t l = v[u.size()];
    if (l < m1) {
      out.push_back(ClopenSet::tailCyl(u, m1));
      return;
    }
    out.push_back(ClopenSet::tailCyl(u, l + 1));
    for (uint64_t t = m1; t < l; ++t) {
      NodePath w = u;
      w.push_back(t);
      out.push_back(ClopenSet::cyl(w));
    }
    NodePath branch = u;
    branch.push_back(l);
    cylMinusTail(branch, v, m2, out);
    return;
  }
  if (isPrefixOf(v, u)) {
    if (u[v.size()] >= m2) return;
    out.push_back(ClopenSet::tailCyl(u, m1));
    return;
  }
  out.push_back(ClopenSet::tailCyl(u, m1));
}

inline std::vector<ClopenSet> baireAtomDiff(const ClopenSet& a, const ClopenSet& b) {
  std::vector<ClopenSet> out;
  bool at = a.kind() == ClopenSet::Kind::TailCyl;
  bool bt = b.kind() == ClopenSet::Kind::TailCyl;
  if (!at && !bt) cylMinusCyl(a.path(), b.path(), out);
  if (!at && bt) cylMinusTail(a.path(), b.path(), b.from(), out);
  if (at && !bt) tailMinusCyl(a.path(), a.from(), b.path(), out);
  if (at && bt) tailMinusTail(a.path(), a.from(), b.path(), b.from(), out);
  return out;
}

inline ClopenSet baireAtomIntersect(const ClopenSet& a, const ClopenSet& b) {
  bool at = a.kind() == ClopenSet::Kind::TailCyl;
  bool bt = b.kind() == ClopenSet::Kind::TailCyl;
  const NodePath& u = a.path();
  const NodePath& v = b.path();
  if (!at && !bt) {
    if (isPrefixOf(u, v)) return b;
    if (isPrefixOf(v, u)) return a;
    return ClopenSet::empty(Space::baire());
  }
  if (!at && bt) {
    if (isPrefixOf(u, v)) return b;
    if (isPrefixOf(v, u) && u.size() > v.size())
      return u[v.size()] >= b.from() ? a : ClopenSet::empty(Space::baire());
    return ClopenSet::empty(Space::baire());
  }
  if (at && !bt) return baireAtomIntersect(b, a);
  if (u == v) return ClopenSet::tailCyl(u, std::max(a.from(), b.from()));
  if (isPrefixOf(u, v))
    return v[u.size()] >= a.from() ? b : ClopenSet::empty(Space::baire());
  if (isPrefixOf(v, u))
    return u[v.size()] >= b.from() ? a : ClopenSet::empty(Space::baire());
  return ClopenSet::empty(Space::baire());
}

}  // end of namespace detail

/* ----- intersection ----- */

inline std::optional<ClopenSet> intersection(const ClopenSet& a, const ClopenSet& b) {
  if (a.space() != b.space()) throw SpaceMismatch("intersecting sets of different spaces");
  const Space& sp = a.space();
  if (a.isEmptySet() || b.isEmptySet()) return ClopenSet::empty(sp);
  if (a.isFullSet()) return b;
  if (b.isFullSet()) return a;

  if (a.kind() == ClopenSet::Kind::Union) {
    std::vector<ClopenSet> out;
    for (const auto& p : a.parts()) {
      auto r = intersection(p, b);
      if (!r) return std::nullopt;
      if (!r->isEmptySet()) out.push_back(std::move(*r));
    }
    return ClopenSet::finUnion(sp, std::move(out));
  }
  if (b.kind() == ClopenSet::Kind::Union) return intersection(b, a);

  if (a.kind() == ClopenSet::Kind::Minus) {
    auto r = intersection(a.base(), b);
    if (!r) return std::nullopt;
    std::vector<Point> keep;
    for (const auto& q : a.removedPoints())
      if (member(q, *r)) keep.push_back(q);
    return ClopenSet::minus(std::move(*r), std::move(keep));
  }
  if (b.kind() == ClopenSet::Kind::Minus) return intersection(b, a);

  bool aLazy = a.kind() == ClopenSet::Kind::SonsUnion;
  bool bLazy = b.kind() == ClopenSet::Kind::SonsUnion;
  if (aLazy && bLazy) {
    if (a.family()->sameFamilyAs(*b.family())) {
      auto f = fiberIntersect(a.fiber(), b.fiber());
      if (!f) return ClopenSet::empty(sp);
      return ClopenSet::sonsUnion(a.family(), *f);
    }
    auto ha = a.family()->hostKey();
    auto hb = b.family()->hostKey();
    if (ha && hb && ha->first == hb->first) {
      const NodePath& va = ha->second;
      const NodePath& vb = hb->second;
      if (!isPrefixOf(va, vb) && !isPrefixOf(vb, va)) return ClopenSet::empty(sp);
      // one family's host node lies under a son selected (or not) by the other
      const ClopenSet& up = va.size() <= vb.size() ? a : b;
      const ClopenSet& dn = va.size() <= vb.size() ? b : a;
      const NodePath& vUp = va.size() <= vb.size() ? va : vb;
      const NodePath& vDn = va.size() <= vb.size() ? vb : va;
      if (vUp.size() == vDn.size()) return std::nullopt;  // same node, alien families
      uint64_t sonIdx = vDn[vUp.size()];
      if (up.fiber().containsIndex(sonIdx)) return dn;
      return ClopenSet::empty(sp);
    }
    return std::nullopt;
  }
  if (aLazy || bLazy) {
    const ClopenSet& L = aLazy ? a : b;
    const ClopenSet& P = aLazy ? b : a;
    if (areDisjoint(L.family()->plainBound(), P) == Triv::Yes) return ClopenSet::empty(sp);
    if (isSubset(L.family()->plainBound(), P) == Triv::Yes) return L;
    // P inside a single son's leaf: selected or discarded wholesale
    auto idx = [&]() -> std::optional<uint64_t> {
      Point q = samplePoint(P);
      if (!member(q, L.family()->plainBound())) return std::nullopt;
      return L.family()->locate(q);
    }();
    if (idx) {
      ClopenSet item = L.family()->leafAt(*idx);
      if (isSubset(P, item) == Triv::Yes)
        return L.fiber().containsIndex(*idx) ? P : ClopenSet::empty(sp);
    }
    if (isSubset(P, L) == Triv::Yes) return P;
    return std::nullopt;
  }

  switch (a.kind()) {
    case ClopenSet::Kind::Cyl:
    case ClopenSet::Kind::TailCyl:
      if (b.kind() != ClopenSet::Kind::Cyl && b.kind() != ClopenSet::Kind::TailCyl)
        return std::nullopt;
      return detail::baireAtomIntersect(a, b);
    case ClopenSet::Kind::SorgIv: {
      if (b.kind() != ClopenSet::Kind::SorgIv) return std::nullopt;
      return ClopenSet::sorgIv(loMax(a.lo(), b.lo()), hiMin(a.hi(), b.hi()));
    }
    case ClopenSet::Kind::Box: {
      if (b.kind() != ClopenSet::Kind::Box) return std::nullopt;
      std::map<size_t, ClopenSet> sup;
      std::vector<size_t> coords;
      for (const auto& [i, f] : a.support()) coords.push_back(i);
      for (const auto& [i, f] : b.support())
        if (!a.support().count(i)) coords.push_back(i);
      for (size_t i : coords) {
        auto r = intersection(a.factorAt(i), b.factorAt(i));
        if (!r) return std::nullopt;
        if (r->isEmptySet()) return ClopenSet::empty(sp);
        sup.emplace(i, std::move(*r));
      }
      return ClopenSet::box(sp, std::move(sup));
    }
    default: return std::nullopt;
  }
}

/* ----- difference ----- */

namespace detail {
// subtracts a plain set from an already computed difference
inline std::optional<SetWithPoints> swpMinus(const SetWithPoints& s, const ClopenSet& b) {
  auto d = difference(s.core, b);
  if (!d) return std::nullopt;
  SetWithPoints out = std::move(*d);
  for (const auto& q : s.plus)
    if (!member(q, b)) out.plus.push_back(q);
  return out;
}
}  // end of namespace detail

inline std::optional<SetWithPoints> difference(const ClopenSet& a, const ClopenSet& b) {
  if (a.space() != b.space()) throw SpaceMismatch("subtracting sets of different spaces");
  const Space& sp = a.space();
  auto just = [](ClopenSet c) { return SetWithPoints{std::move(c), {}}; };
  if (a.isEmptySet() || b.isFullSet()) return just(ClopenSet::empty(sp));
  if (b.isEmptySet()) return just(a);

  if (a.kind() == ClopenSet::Kind::Union) {
    SetWithPoints acc{ClopenSet::empty(sp), {}};
    std::vector<ClopenSet> cores;
    for (const auto& p : a.parts()) {
      auto d = difference(p, b);
      if (!d) return std::nullopt;
      if (!d->core.isEmptySet()) cores.push_back(d->core);
      for (auto& q : d->plus) acc.plus.push_back(std::move(q));
    }
    acc.core = ClopenSet::finUnion(sp, std::move(cores));
    return acc;
  }
  if (a.kind() == ClopenSet::Kind::Minus) {
    auto d = difference(a.base(), b);
    if (!d) return std::nullopt;
    SetWithPoints out;
    std::vector<Point> back;
    for (const auto& q : a.removedPoints())
      if (member(q, d->core)) back.push_back(q);
    out.core = ClopenSet::minus(d->core, back);
    for (const auto& q : d->plus) {
      bool removed = false;
      for (const auto& r : a.removedPoints())
        if (r == q) removed = true;
      if (!removed) out.plus.push_back(q);
    }
    return out;
  }
  if (b.kind() == ClopenSet::Kind::Union) {
    SetWithPoints acc{a, {}};
    for (const auto& p : b.parts()) {
      auto d = detail::swpMinus(acc, p);
      if (!d) return std::nullopt;
      acc = std::move(*d);
    }
    return acc;
  }
  if (b.kind() == ClopenSet::Kind::Minus) {
    auto d = difference(a, b.base());
    if (!d) return std::nullopt;
    for (const auto& q : b.removedPoints())
      if (member(q, a)) d->plus.push_back(q);
    return d;
  }

  bool aLazy = a.kind() == ClopenSet::Kind::SonsUnion;
  bool bLazy = b.kind() == ClopenSet::Kind::SonsUnion;
  if (aLazy && bLazy && a.family()->sameFamilyAs(*b.family())) {
    std::vector<ClopenSet> pieces;
    for (const auto& f : fiberDiff(a.fiber(), b.fiber()))
      pieces.push_back(ClopenSet::sonsUnion(a.family(), f));
    return just(ClopenSet::finUnion(sp, std::move(pieces)));
  }
  if (aLazy && !bLazy) {
    if (areDisjoint(a.family()->plainBound(), b) == Triv::Yes) return just(a);
    // b may be exactly one son's leaf: drop it from the fiber
    Point q = samplePoint(b);
    if (member(q, a.family()->plainBound())) {
      auto idx = a.family()->locate(q);
      if (idx && equalSets(b, a.family()->leafAt(*idx)) == Triv::Yes) {
        Fiber single;
        single.k = a.fiber().k;
        single.prefix = tupleDec(*idx, a.fiber().k);
        std::vector<ClopenSet> pieces;
        for (const auto& f : fiberDiff(a.fiber(), single))
          pieces.push_back(ClopenSet::sonsUnion(a.family(), f));
        return just(ClopenSet::finUnion(sp, std::move(pieces)));
      }
    }
    if (isSubset(a, b) == Triv::Yes) return just(ClopenSet::empty(sp));
    return std::nullopt;
  }
  if (bLazy && !aLazy) {
    if (areDisjoint(a, b.family()->plainBound()) == Triv::Yes) return just(a);
    if (isSubset(a, b) == Triv::Yes) return just(ClopenSet::empty(sp));
    // a is the family's whole span: peel the fiber symbolically
    if (equalSets(a, b.family()->residual(0)) == Triv::Yes) {
      Fiber full;
      full.k = b.fiber().k;
      std::vector<ClopenSet> pieces;
      for (const auto& f : fiberDiff(full, b.fiber()))
        pieces.push_back(ClopenSet::sonsUnion(b.family(), f));
      return just(ClopenSet::finUnion(sp, std::move(pieces)));
    }
    Point q = samplePoint(a);
    if (member(q, b.family()->plainBound())) {
      auto idx = b.family()->locate(q);
      if (idx && isSubset(a, b.family()->leafAt(*idx)) == Triv::Yes)
        return b.fiber().containsIndex(*idx) ? just(ClopenSet::empty(sp)) : just(a);
    }
    return std::nullopt;
  }
  if (aLazy && bLazy) {
    auto i = intersection(a, b);
    if (i && i->isEmptySet()) return just(a);
    return std::nullopt;
  }

  switch (a.kind()) {
    case ClopenSet::Kind::Cyl:
    case ClopenSet::Kind::TailCyl: {
      if (b.kind() != ClopenSet::Kind::Cyl && b.kind() != ClopenSet::Kind::TailCyl)
        return std::nullopt;
      return just(ClopenSet::finUnion(sp, detail::baireAtomDiff(a, b)));
    }
    case ClopenSet::Kind::SorgIv: {
      if (b.kind() != ClopenSet::Kind::SorgIv) return std::nullopt;
      std::vector<ClopenSet> pieces;
      if (b.lo()) pieces.push_back(ClopenSet::sorgIv(a.lo(), hiMin(a.hi(), *b.lo())));
      if (b.hi()) pieces.push_back(ClopenSet::sorgIv(loMax(a.lo(), *b.hi()), a.hi()));
      return just(ClopenSet::finUnion(sp, std::move(pieces)));
    }
    case ClopenSet::Kind::Box: {
      if (b.kind() != ClopenSet::Kind::Box) return std::nullopt;
      std::vector<size_t> coords;
      for (const auto& [i, f] : b.support()) coords.push_back(i);
      std::sort(coords.begin(), coords.end());
      // peel one coordinate at a time: piece j keeps the intersection on
      // earlier peeled coordinates and removes b's factor on coordinate j
      std::vector<ClopenSet> pieces;
      std::map<size_t, ClopenSet> metSoFar;
      for (size_t j : coords) {
        auto fd = difference(a.factorAt(j), b.factorAt(j));
        if (!fd) return std::nullopt;
        if (!fd->plus.empty()) return std::nullopt;  // a slice, not a box
        if (!fd->core.isEmptySet()) {
          std::map<size_t, ClopenSet> sup = metSoFar;
          for (const auto& [i, f] : a.support())
            if (!sup.count(i) && i != j) sup.emplace(i, f);
          sup.erase(j);
          sup.emplace(j, fd->core);
          pieces.push_back(ClopenSet::box(sp, std::move(sup)));
        }
        auto fi = intersection(a.factorAt(j), b.factorAt(j));
        if (!fi) return std::nullopt;
        if (fi->isEmptySet()) return just(a);  // the boxes never met
        metSoFar.emplace(j, std::move(*fi));
      }
      return just(ClopenSet::finUnion(sp, std::move(pieces)));
    }
    default: return std::nullopt;
  }
}

/* ----- subset, disjointness, equality ----- */

inline Triv isSubset(const ClopenSet& a, const ClopenSet& b) {
  if (a.space() != b.space()) throw SpaceMismatch("comparing sets of different spaces");
  if (a.isEmptySet()) return Triv::Yes;
  if (b.isFullSet()) return Triv::Yes;
  if (b.isEmptySet()) return Triv::No;
  if (a.sameShape(b)) return Triv::Yes;

  if (a.kind() == ClopenSet::Kind::Union) {
    Triv acc = Triv::Yes;
    for (const auto& p : a.parts()) acc = trivAnd(acc, isSubset(p, b));
    return acc;
  }

  // lazy left side against a plain right side: classwise tail argument
  if (a.kind() == ClopenSet::Kind::SonsUnion && b.kind() != ClopenSet::Kind::SonsUnion) {
    const auto& fam = *a.family();
    const Fiber& fib = a.fiber();
    auto st = fam.stability(b);
    if (st) {
      uint64_t bound = std::max<uint64_t>(st->bound, 1);
      for (uint64_t idx : fib.indicesBelow(bound)) {
        Triv t = isSubset(fam.leafAt(idx), b);
        if (t != Triv::Yes) return t;
      }
      // the fiber meets every residue class beyond any bound, so every
      // class must be inside; probe one representative per class twice
      for (uint32_t r = 0; r < st->period; ++r) {
        uint64_t rep = bound + r;
        Triv t1 = isSubset(fam.leafAt(rep), b);
        Triv t2 = isSubset(fam.leafAt(rep + st->period), b);
        if (t1 == Triv::Unknown || t2 == Triv::Unknown) return Triv::Unknown;
        if (t1 != t2) return Triv::Unknown;  // stability guard tripped
        if (t1 == Triv::No) return Triv::No;
      }
      return Triv::Yes;
    }
    if (isSubset(fam.plainBound(), b) == Triv::Yes) return Triv::Yes;
    return Triv::Unknown;
  }

  // plain left side against a lazy union: lands inside a single son or not
  if (b.kind() == ClopenSet::Kind::SonsUnion && a.kind() != ClopenSet::Kind::SonsUnion &&
      a.kind() != ClopenSet::Kind::Union) {
    const auto& fam = *b.family();
    if (areDisjoint(a, fam.plainBound()) == Triv::Yes) return Triv::No;
    Point q = samplePoint(a);
    if (!member(q, fam.plainBound())) return Triv::No;
    auto idx = fam.locate(q);
    if (!idx) return Triv::No;
    Triv inside = isSubset(a, fam.leafAt(*idx));
    if (inside == Triv::Yes)
      return b.fiber().containsIndex(*idx) ? Triv::Yes : Triv::No;
    return Triv::Unknown;
  }

  auto d = difference(a, b);
  if (d) return d->isEmpty() ? Triv::Yes : Triv::No;
  auto i = intersection(a, b);
  if (i && equalSets(*i, a) == Triv::Yes) return Triv::Yes;
  return Triv::Unknown;
}

inline Triv areDisjoint(const ClopenSet& a, const ClopenSet& b) {
  if (a.isEmptySet() || b.isEmptySet()) return Triv::Yes;
  auto i = intersection(a, b);
  if (i) return i->isEmptySet() ? Triv::Yes : Triv::No;
  // one sided containment of a sample point settles "not disjoint"
  if (member(samplePoint(a), b) || member(samplePoint(b), a)) return Triv::No;
  return Triv::Unknown;
}

inline Triv equalSets(const ClopenSet& a, const ClopenSet& b) {
  if (a.sameShape(b)) return Triv::Yes;
  return trivAnd(isSubset(a, b), isSubset(b, a));
}

/* ----- sample points ----- */

inline Point samplePointAvoiding(const ClopenSet& a, const std::vector<Point>& avoid) {
  auto fresh = [&](auto gen) -> Point {
    for (uint64_t t = 0; t <= avoid.size(); ++t) {
      Point c = gen(t);
      bool hit = false;
      for (const auto& q : avoid)
        if (q == c) hit = true;
      if (!hit) return c;
    }
    throw PitreeError("sample generator exhausted");
  };
  switch (a.kind()) {
    case ClopenSet::Kind::Empty: throw PitreeError("sampling the empty set");
    case ClopenSet::Kind::Cyl:
      return fresh([&](uint64_t t) { return Point(BairePoint{a.path(), t}); });
    case ClopenSet::Kind::TailCyl:
      return fresh([&](uint64_t t) {
        NodePath u = a.path();
        u.push_back(a.from() + t);
        return Point(BairePoint{u, 0});
      });
    case ClopenSet::Kind::SorgIv: {
      Rat base = a.lo() ? *a.lo() : (a.hi() ? *a.hi() - Rat(1) : Rat(0));
      Rat width = a.hi() ? (*a.hi() - base) : Rat(1);
      return fresh([&](uint64_t t) {
        // base, then base + width/2, base + width/4, ...
        return Point(SorgPoint{t == 0 ? base : base + width / Rat(BigInt(1) << (unsigned)t)});
      });
    }
    case ClopenSet::Kind::Box: {
      const Space& sp = a.space();
      size_t explicitLen = 0;
      for (const auto& [i, f] : a.support()) explicitLen = std::max(explicitLen, i + 1);
      if (sp.lambda) explicitLen = *sp.lambda;
      return fresh([&](uint64_t t) {
        ProductPoint pp;
        for (size_t i = 0; i < explicitLen; ++i) {
          std::vector<Point> av;
          if (i == 0)
            for (uint64_t s = 0; s < t; ++s)
              av.push_back(samplePointAvoiding(a.factorAt(0), av));
          pp.coords.push_back(samplePointAvoiding(a.factorAt(i), av));
        }
        if (!sp.lambda) {
          for (size_t c = 1; c < sp.factors.size(); ++c)
            if (!(sp.factorAt(explicitLen) == sp.factorAt(explicitLen + c)))
              throw SpaceMismatch("no describable points: heterogeneous omega product");
          pp.tailTemplate = std::make_shared<Point>(
              samplePointAvoiding(ClopenSet::full(sp.factorAt(explicitLen)), {}));
        }
        return Point(std::move(pp));
      });
    }
    case ClopenSet::Kind::Union: {
      // spread the avoidance load across parts
      for (const auto& p : a.parts()) {
        for (uint64_t t = 0; t <= avoid.size(); ++t) {
          Point c = samplePointAvoiding(p, avoid);
          bool hit = false;
          for (const auto& q : avoid)
            if (q == c) hit = true;
          if (!hit) return c;
        }
      }
      throw PitreeError("sample generator exhausted on union");
    }
    case ClopenSet::Kind::Minus: {
      std::vector<Point> av = avoid;
      for (const auto& q : a.removedPoints()) av.push_back(q);
      return samplePointAvoiding(a.base(), av);
    }
    default: {
      Fiber f = a.fiber();
      while (!f.isSingleton()) {
        f.prefix.push_back(f.minNext);
        f.minNext = 0;
        f.omitNext.clear();
        f.normalize();
      }
      return samplePointAvoiding(a.family()->leafAt(tupleEnc(f.prefix)), avoid);
    }
  }
}

inline Point samplePoint(const ClopenSet& a) { return samplePointAvoiding(a, {}); }

/* ----- default refinement decision ----- */

// tail decision over son indices for an arbitrary yes/no test on son leaves,
// using the family's stability promise plus a double-representative guard
inline RefineDecision refinesUnder(const SonFamily& fam,
                                   const std::optional<StabilityInfo>& st,
                                   const std::function<Triv(const ClopenSet&)>& test) {
  RefineDecision rd;
  if (!st) {
    rd.note = "no stability bound available for this target";
    return rd;
  }
  uint64_t bound = std::max(st->bound, fam.explicitCount());
  for (uint64_t i = 0; i < bound; ++i) {
    Triv t = test(fam.leafAt(i));
    if (t == Triv::Unknown) {
      rd.note = "undecidable leaf at index " + std::to_string(i);
      return rd;
    }
    if (t == Triv::No) rd.exceptions.push_back(i);
  }
  for (uint32_t r = 0; r < st->period; ++r) {
    uint64_t rep = bound + r;
    Triv t1 = test(fam.leafAt(rep));
    Triv t2 = test(fam.leafAt(rep + st->period));
    if (t1 == Triv::Unknown || t2 == Triv::Unknown || t1 != t2) {
      rd.note = "stability guard tripped at class " + std::to_string(r);
      return rd;
    }
    if (t1 == Triv::No) {
      rd.verdict = Triv::No;
      rd.witnesses.push_back(rep);
    }
  }
  if (rd.verdict == Triv::No) {
    rd.exceptions.clear();
    rd.note = "a full residue class of son leaves escapes the target";
    return rd;
  }
  rd.verdict = Triv::Yes;
  rd.tailFrom = bound;
  rd.note = "all son leaves from " + std::to_string(bound) + " on are inside";
  return rd;
}

inline RefineDecision SonFamily::refines(const ClopenSet& target) const {
  return refinesUnder(*this, stability(target),
                      [&](const ClopenSet& s) { return isSubset(s, target); });
}

/* ----- the box difference decomposition ----- */

// pieces of  prod_i Tail(a_i, m)  minus  prod_i Tail(a_i, m+1)  as disjoint
// boxes over the k fold Baire product; piece j pins coordinate j to the son
// a_j + <m> and splits the rest by which side of the threshold they sit on
inline std::vector<ClopenSet> boxDifferenceDecomposition(uint32_t k,
                                                         const std::vector<NodePath>& a,
                                                         uint64_t m) {
  if (k == 0 || a.size() != k) throw ArityZero("box difference needs k >= 1 paths");
  std::vector<Space> fs(k, Space::baire());
  Space sp = Space::product(k, fs);
  std::vector<ClopenSet> out;
  for (uint32_t j = 0; j < k; ++j) {
    std::map<size_t, ClopenSet> sup;
    for (uint32_t i = 0; i < j; ++i) sup.emplace(i, ClopenSet::tailCyl(a[i], m + 1));
    NodePath son = a[j];
    son.push_back(m);
    sup.emplace(j, ClopenSet::cyl(son));
    for (uint32_t i = j + 1; i < k; ++i) sup.emplace(i, ClopenSet::tailCyl(a[i], m));
    out.push_back(ClopenSet::box(sp, std::move(sup)));
  }
  return out;
}

}  // end of namespace pitree
