#pragma once

/****************************************************************************
 * A pi-tree on the Sorgenfrey line.
 *
 * The root's sons walk the unit intervals [z,z+1) in the zigzag order
 * 0, 1, -1, 2, -2, ...  Below the root, the sons of [a,b) are the
 * geometric slices [x_n, x_{n+1}) with x_n = b - (b-a) 2^{-n}: they pile up
 * at the right endpoint, which the leaf never attains, so every branch
 * separates points.  All endpoints are exact rationals.
 ****************************************************************************/

#include "pitree/tree.hpp"

namespace pitree {

inline Rat zigzag(uint64_t i) {
  if (i == 0) return Rat(0);
  if (i % 2 == 1) return Rat(BigInt((i + 1) / 2));
  return Rat(-BigInt(i / 2));
}

inline uint64_t zigzagIndexOf(const BigInt& n) {
  if (n == 0) return 0;
  if (n > 0) return 2 * (uint64_t)n - 1;
  return (uint64_t)(-n) * 2;
}

inline BigInt ceilRat(const Rat& r) { return -floorRat(-r); }

class SorgRootFamily final : public SonFamily {
 public:
  explicit SorgRootFamily(Json treeTerm) : term_(std::move(treeTerm)) {}

  ClopenSet leafAt(uint64_t i) const override {
    Rat z = zigzag(i);
    return ClopenSet::sorgIv(z, z + Rat(1));
  }

  ClopenSet residual(uint64_t n) const override {
    if (n == 0) return ClopenSet::sorgIv(std::nullopt, std::nullopt);
    // sons up to n cover [lo, hi); the rest is everything outside
    Rat lo = Rat(-BigInt((n - 1) / 2));
    Rat hi = Rat(BigInt(1 + n / 2));
    return ClopenSet::finUnion(Space::sorg(),
                               {ClopenSet::sorgIv(std::nullopt, lo),
                                ClopenSet::sorgIv(hi, std::nullopt)});
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    return zigzagIndexOf(floorRat(p.sorg().value));
  }

  ClopenSet plainBound() const override {
    return ClopenSet::sorgIv(std::nullopt, std::nullopt);
  }

  // sons alternate sides once past every endpoint of the probe, so the
  // relation is constant per parity from there on
  std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const override {
    uint64_t reach = b.maxAbs ? (uint64_t)ceilRat(*b.maxAbs) : 0;
    return StabilityInfo{2 * (reach + 1), 2};
  }

  Json describe() const override {
    return Json{{"family", "sorgRoot"}, {"tree", term_}, {"path", Json::array()}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(term_, NodePath{});
  }

 private:
  Json term_;
};

class SorgSubFamily final : public SonFamily {
 public:
  SorgSubFamily(Rat lo, Rat hi, Json treeTerm, NodePath path)
      : lo_(std::move(lo)), hi_(std::move(hi)), term_(std::move(treeTerm)),
        path_(std::move(path)) {}

  // x_n = hi - (hi-lo) 2^{-n}
  Rat cut(uint64_t n) const { return hi_ - (hi_ - lo_) * pow2inv(n); }

  ClopenSet leafAt(uint64_t i) const override {
    return ClopenSet::sorgIv(cut(i), cut(i + 1));
  }

  ClopenSet residual(uint64_t n) const override {
    return ClopenSet::sorgIv(cut(n), hi_);
  }

  std::optional<uint64_t> locate(const Point& p) const override {
    const Rat& v = p.sorg().value;
    if (v < lo_ || !(v < hi_)) return std::nullopt;
    uint64_t i = 0;
    while (!(v < cut(i + 1))) ++i;
    return i;
  }

  ClopenSet plainBound() const override { return ClopenSet::sorgIv(lo_, hi_); }

  std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const override {
    // once the slices pass every probe constant below hi, nothing changes
    std::optional<Rat> emax;
    for (const Rat& e : b.endpoints)
      if (e < hi_ && (!emax || *emax < e)) emax = e;
    uint64_t i = 0;
    if (emax)
      while (!(*emax < cut(i))) ++i;
    return StabilityInfo{i, 1};
  }

  Json describe() const override {
    return Json{{"family", "sorgSub"},
                {"tree", term_},
                {"path", path_},
                {"lo", ratToString(lo_)},
                {"hi", ratToString(hi_)}};
  }

  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(term_, path_);
  }

 private:
  Rat lo_, hi_;
  Json term_;
  NodePath path_;
};

class SorgenfreyTree final : public FoliageTree {
 public:
  const Space& space() const override {
    static const Space sp = Space::sorg();
    return sp;
  }

  ClopenSet rootLeaf() const override {
    return ClopenSet::sorgIv(std::nullopt, std::nullopt);
  }

  Json term() const override { return Json{{"sorgenfrey", Json::object()}}; }

  bool certified() const override { return true; }

  // exact endpoints of the leaf at a path below the root
  std::pair<Rat, Rat> intervalOf(const NodePath& v) const {
    Rat z = zigzag(v[0]);
    Rat lo = z, hi = z + Rat(1);
    for (size_t j = 1; j < v.size(); ++j) {
      Rat a = hi - (hi - lo) * pow2inv(v[j]);
      Rat b = hi - (hi - lo) * pow2inv(v[j] + 1);
      lo = a;
      hi = b;
    }
    return {lo, hi};
  }

  Json branchProxy(const NodePath& v) const override {
    if (v.empty())
      return Json{{"measure", "leafWidth"}, {"value", "line"}, {"ok", true}};
    auto [lo, hi] = intervalOf(v);
    Rat width = hi - lo;
    Rat bound = pow2inv(v.size() - 1);  // 2^{1-depth}
    return Json{{"measure", "leafWidth"},
                {"value", ratToString(width)},
                {"required", ratToString(bound)},
                {"ok", !(bound < width)}};
  }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    if (v.empty()) return std::make_shared<SorgRootFamily>(term());
    auto [lo, hi] = intervalOf(v);
    return std::make_shared<SorgSubFamily>(lo, hi, term(), v);
  }
};

inline TreePtr sorgenfreyTree() { return std::make_shared<SorgenfreyTree>(); }

}  // end of namespace pitree
