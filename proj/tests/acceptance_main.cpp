// acceptance suite: one line per criterion, exit 1 if any of them fails

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pitree/export.hpp"
#include "pitree/hybrid.hpp"

using namespace pitree;

namespace {

int failures = 0;

template <class Body>
void criterion(int idx, const char* name, int64_t budgetMs, Body body) {
  std::string note;
  bool ok = false;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(note);
  } catch (const std::exception& e) {
    note = std::string("exception: ") + e.what();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  if (ok && budgetMs > 0 && ms >= budgetMs) {
    ok = false;
    note = "over the " + std::to_string(budgetMs) + " ms budget";
  }
  std::printf("[%s] criterion %d: %s (%lld ms)%s%s\n", ok ? "PASS" : "FAIL", idx,
              name, (long long)ms, note.empty() ? "" : ": ", note.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

Point bp(std::vector<uint64_t> prefix, uint64_t tail = 0) {
  BairePoint p;
  p.prefix = std::move(prefix);
  p.tail = tail;
  return Point(p);
}

Point pp(std::vector<Point> coords) {
  ProductPoint p;
  p.coords = std::move(coords);
  return Point(p);
}

Point sp(int64_t num, int64_t den = 1) { return Point(SorgPoint{makeRat(num, den)}); }

// all paths of the given length whose entries stay below the bound
std::vector<NodePath> pathsBelow(size_t len, uint64_t bound) {
  std::vector<NodePath> out{NodePath{}};
  for (size_t i = 0; i < len; ++i) {
    std::vector<NodePath> next;
    for (const auto& v : out)
      for (uint64_t e = 0; e < bound; ++e) {
        auto w = v;
        w.push_back(e);
        next.push_back(std::move(w));
      }
    out = std::move(next);
  }
  return out;
}

// every eventually constant sequence determined by its first maxLen values,
// all values below the bound
std::vector<Point> bairePointsBelow(size_t maxLen, uint64_t bound) {
  std::vector<Point> out;
  for (size_t len = 0; len <= maxLen; ++len)
    for (const auto& pre : pathsBelow(len, bound))
      for (uint64_t tail = 0; tail < bound; ++tail) out.push_back(bp(pre, tail));
  return out;
}

FilterCert ladderCert(uint64_t upTo) {
  return FilterCert::fromJson(Json{{"ladder", Json{{"upTo", upTo}}}});
}

bool riseEqualsTail(const RiseSet& r, uint64_t from, uint64_t depth) {
  if (!r.undecided.empty()) return false;
  if (r.known.size() != depth - from) return false;
  for (uint64_t x = from; x < depth; ++x)
    if (!r.knownContains(x)) return false;
  return true;
}

}  // namespace

/* ----- criterion bodies ----- */

static bool riseIdentity(std::string& note) {
  auto t = standardTree();
  Point p = bp({}, 0);
  for (uint64_t n = 0; n <= 3; ++n) {
    auto r = rise(*t, p, ClopenSet::cyl(NodePath(n, 0)), 8);
    if (!riseEqualsTail(r, n, 8)) {
      note = "rise at n=" + std::to_string(n) + " is " + r.toJson().dump();
      return false;
    }
  }
  return true;
}

static bool foliageSuites(std::string& note) {
  std::vector<std::pair<const char*, TreePtr>> trees;
  trees.emplace_back("standard", standardTree());
  trees.emplace_back("sorgenfrey", sorgenfreyTree());
  trees.emplace_back("product(2; standard, standard)",
                     productTree(2, {standardTree(), standardTree()}));
  trees.emplace_back("product(2; sorgenfrey, sorgenfrey)",
                     productTree(2, {sorgenfreyTree(), sorgenfreyTree()}));
  trees.emplace_back(
      "product(3; sorgenfrey, sorgenfrey, standard)",
      productTree(3, {sorgenfreyTree(), sorgenfreyTree(), standardTree()}));
  trees.emplace_back("product(omega; sorgenfrey)",
                     productTree(std::nullopt, {sorgenfreyTree()}));
  for (const auto& [name, t] : trees) {
    Report rep = baireFoliageSuite(*t, 6, 32);
    if (rep.exitCode() != 0) {
      note = std::string(name) + ": " + rep.toJson().dump();
      return false;
    }
  }
  return true;
}

static bool productDecomposition(std::string& note) {
  const uint64_t peel = 5;
  for (uint32_t lambda : {2u, 3u}) {
    std::vector<TreePtr> comps(lambda, standardTree());
    auto T = productTree(lambda, comps);

    // symbolic: at every odd node the gap leaf splits exactly into the
    // grandson boxes plus the telescoped residual
    for (size_t n = 0; n <= 2; ++n) {
      for (const auto& v : pathsBelow(2 * n, 3)) {
        for (uint64_t m = 0; m <= 3; ++m) {
          NodePath odd = v;
          odd.push_back(m);
          const auto& fam = *T->sons(odd);
          if (equalSets(fam.residual(0), T->leafAt(odd)) != Triv::Yes) {
            note = "residual(0) mismatch at " + pathToString(odd);
            return false;
          }
          for (uint64_t l = 0; l < peel; ++l) {
            auto d = difference(fam.residual(l), fam.leafAt(l));
            if (!d || !d->plus.empty() ||
                equalSets(d->core, fam.residual(l + 1)) != Triv::Yes) {
              note = "peel " + std::to_string(l) + " at " + pathToString(odd);
              return false;
            }
            for (uint64_t i = 0; i < l; ++i)
              if (areDisjoint(fam.leafAt(i), fam.leafAt(l)) != Triv::Yes) {
                note = "sons " + std::to_string(i) + "," + std::to_string(l) +
                       " overlap at " + pathToString(odd);
                return false;
              }
          }
        }
      }
    }

    // point level: membership in the gap leaf agrees with membership in the
    // union of grandsons and tail residual, brute forced over small points
    std::vector<Point> coordPoints = bairePointsBelow(lambda == 2 ? 2 : 1, 4);
    std::vector<Point> pts;
    std::vector<size_t> pick(lambda, 0);
    for (;;) {
      std::vector<Point> coords;
      for (uint32_t i = 0; i < lambda; ++i) coords.push_back(coordPoints[pick[i]]);
      pts.push_back(pp(std::move(coords)));
      size_t i = 0;
      while (i < lambda && ++pick[i] == coordPoints.size()) pick[i++] = 0;
      if (i == lambda) break;
    }
    const uint64_t L = 6;
    for (size_t n = 0; n <= 2; ++n) {
      for (const auto& v : pathsBelow(2 * n, 2)) {
        for (uint64_t m = 0; m <= 3; ++m) {
          NodePath odd = v;
          odd.push_back(m);
          const auto& fam = *T->sons(odd);
          ClopenSet gap = T->leafAt(odd);
          for (const auto& p : pts) {
            bool inGap = member(p, gap);
            bool inParts = member(p, fam.residual(L));
            for (uint64_t l = 0; l < L && !inParts; ++l)
              inParts = member(p, fam.leafAt(l));
            if (inGap != inParts) {
              note = "point mismatch at " + pathToString(odd) + " point " +
                     pointToJson(p).dump();
              return false;
            }
          }
        }
      }
    }
  }
  return true;
}

static bool filterShift(std::string& note) {
  FilterCert lad = ladderCert(8);
  FilterCert arith =
      FilterCert::fromJson(Json{{"arithLadder", Json{{"step", 2}, {"upTo", 8}}}});
  std::vector<std::pair<const char*, std::vector<FilterCert>>> gammas = {
      {"cofinite", {lad, lad}}, {"arithmetic", {lad, arith}}};
  for (const auto& [name, gamma] : gammas) {
    ShiftResult sr = shiftFilters({lad, lad}, gamma);
    ClubReport club = checkClubCondition(sr, {lad, lad}, 200, 3);
    if (!club.pass) {
      note = std::string("images fail to meet for the ") + name + " instance";
      return false;
    }
  }
  return true;
}

static bool rescaleChecks(std::string& note) {
  std::vector<std::pair<const char*, AlphaMap>> maps;
  maps.emplace_back("identity", AlphaMap::identity());
  maps.emplace_back("2n+1", AlphaMap::affine2np1());

  struct Sample {
    TreePtr base;
    Point p;
    ClopenSet u;
  };
  std::vector<Sample> samples;
  samples.push_back({standardTree(), bp({}, 0), ClopenSet::cyl({0})});
  samples.push_back({standardTree(), bp({}, 0), ClopenSet::cyl({0, 0, 0})});
  samples.push_back({standardTree(), bp({2, 1}, 0), ClopenSet::tailCyl({2}, 1)});
  samples.push_back({standardTree(), bp({1}, 1), ClopenSet::cyl({1})});
  samples.push_back({standardTree(), bp({0, 3}, 3), ClopenSet::cyl({0})});
  auto iv = [](int64_t an, int64_t ad, int64_t bn, int64_t bd) {
    return ClopenSet::sorgIv(makeRat(an, ad), makeRat(bn, bd));
  };
  samples.push_back({sorgenfreyTree(), sp(0), iv(0, 1, 1, 4)});
  samples.push_back({sorgenfreyTree(), sp(1, 3), iv(1, 3, 5, 12)});
  samples.push_back({sorgenfreyTree(), sp(-5, 2), iv(-5, 2, -9, 4)});
  samples.push_back({sorgenfreyTree(), sp(7, 3), iv(7, 3, 29, 12)});
  samples.push_back({sorgenfreyTree(), sp(9, 8), iv(9, 8, 19, 16)});

  for (const auto& [mapName, am] : maps) {
    // height identity: every base node of depth <= 6 lands at alpha(h-1)+1
    // and carries the very same leaf
    for (const auto& base : {standardTree(), sorgenfreyTree()}) {
      auto h = rescaleTree(base, am);
      const auto& rt = dynamic_cast<const RescaleTree&>(*h);
      std::vector<NodePath> frontier{{}};
      for (int level = 0; level <= 6; ++level) {
        std::vector<NodePath> next;
        for (const auto& v : frontier) {
          NodePath vh = rt.rescaledPathOf(v);
          if ((int64_t)vh.size() != am.at((int64_t)v.size() - 1) + 1) {
            note = std::string(mapName) + ": height mismatch at " + pathToString(v);
            return false;
          }
          if (equalSets(h->leafAt(vh), base->leafAt(v)) != Triv::Yes) {
            note = std::string(mapName) + ": leaf mismatch at " + pathToString(v);
            return false;
          }
          if (level < 6)
            for (uint64_t i = 0; i < 3; ++i) {
              auto w = v;
              w.push_back(i);
              next.push_back(std::move(w));
            }
        }
        frontier = std::move(next);
      }
    }

    // rise transfer: mapped known heights of the base rise show up in the
    // rescaled tree's rise
    for (const auto& s : samples) {
      auto h = rescaleTree(s.base, am);
      auto rBase = rise(*s.base, s.p, s.u, 6);
      auto rH = rise(*h, s.p, s.u, (uint64_t)am.at(6) + 1);
      if (!rBase.undecided.empty()) {
        note = std::string(mapName) + ": base rise undecided at " +
               pointToJson(s.p).dump();
        return false;
      }
      for (uint64_t n : rBase.known)
        if (!rH.knownContains(am(n))) {
          note = std::string(mapName) + ": height " + std::to_string(am(n)) +
                 " missing from the rescaled rise at " + pointToJson(s.p).dump();
          return false;
        }
    }
  }
  return true;
}

static bool cocountableChecks(std::string& note) {
  std::vector<Point> pts{sp(0), sp(1, 2), sp(-3, 4), sp(7, 3), sp(1, 42)};
  auto base = sorgenfreyTree();
  auto h = cocountableTree(base, pts);
  const auto& ct = dynamic_cast<const CocountableTree&>(*h);

  // stage partitions: peeling at every stage node is exact, sons are
  // pairwise disjoint and the removed point is in none of them
  for (size_t i = 0; i < ct.stageCount(); ++i) {
    NodePath vh = ct.fromBase(ct.stagePath(i));
    if (vh.size() % 2 != 0) {
      note = "odd stage height at stage " + std::to_string(i);
      return false;
    }
    const auto& fam = *h->sons(vh);
    if (equalSets(fam.residual(0), h->leafAt(vh)) != Triv::Yes) {
      note = "residual(0) mismatch at stage " + std::to_string(i);
      return false;
    }
    for (uint64_t l = 0; l < 8; ++l) {
      auto rest = difference(fam.residual(l), fam.leafAt(l));
      if (!rest || !rest->plus.empty() ||
          equalSets(rest->core, fam.residual(l + 1)) != Triv::Yes) {
        note = "peel " + std::to_string(l) + " at stage " + std::to_string(i);
        return false;
      }
      if (member(pts[i], fam.leafAt(l))) {
        note = "removed point survives in son " + std::to_string(l);
        return false;
      }
      for (uint64_t m = 0; m < l; ++m)
        if (areDisjoint(fam.leafAt(m), fam.leafAt(l)) != Triv::Yes) {
          note = "sons overlap at stage " + std::to_string(i);
          return false;
        }
    }
  }

  // ten sampled neighborhoods: the mapped base rise is included at odd
  // heights, and the rise ends in an odd tail below the depth bound
  struct Sample {
    Point p;
    Rat radius;
  };
  std::vector<Sample> samples = {
      {sp(1, 3), makeRat(1, 4)},  {sp(-5, 2), makeRat(1, 2)},
      {sp(9, 8), makeRat(1, 16)}, {sp(4, 7), makeRat(1, 8)},
      {sp(11, 5), makeRat(1, 4)}, {sp(-1, 3), makeRat(1, 2)},
      {sp(5, 9), makeRat(1, 16)}, {sp(-7, 4), makeRat(1, 4)},
      {sp(13, 6), makeRat(1, 8)}, {sp(3, 8), makeRat(1, 4)}};
  const uint64_t depth = 13;
  for (const auto& s : samples) {
    Rat lo = std::get<SorgPoint>(s.p.v).value;
    auto u = ClopenSet::sorgIv(lo, lo + s.radius);
    auto riseF = rise(*base, s.p, u, 6);
    auto riseH = rise(*h, s.p, ClopenSet::minus(u, pts), depth);
    auto scH = scope(*h, s.p, depth);
    for (uint64_t n = 0; 2 * n + 1 < depth; ++n) {
      uint64_t fp = ct.toBase(scH[2 * n + 1]).size();
      if (riseF.knownContains(fp) && !riseH.knownContains(2 * n + 1)) {
        note = "mapped rise height " + std::to_string(2 * n + 1) + " missing at " +
               pointToJson(s.p).dump();
        return false;
      }
    }
    uint64_t from = depth;
    for (uint64_t x = depth; x-- > 0;) {
      if (x % 2 == 0) continue;
      if (!riseH.knownContains(x)) break;
      from = x;
    }
    if (from >= depth - 2) {
      note = "no odd tail below the bound at " + pointToJson(s.p).dump();
      return false;
    }
  }
  return true;
}

static bool hybridOracle(std::string& note) {
  std::mt19937 rng(460231);
  for (int i = 0; i < 100; ++i) {
    auto [host, fam] = randomOracleInstance(rng);
    auto bad = oracleMismatch(host, fam);
    if (bad) {
      note = "instance " + std::to_string(i) + ": " + *bad;
      return false;
    }
  }
  return true;
}

static bool faultInjection(std::string& note) {
  std::mt19937 rng(903412);
  for (uint32_t seed = 0; seed < 20; ++seed) {
    CorruptMode mode = seed % 3 == 0   ? CorruptMode::OverlapSons
                       : seed % 3 == 1 ? CorruptMode::LeafEscape
                                       : CorruptMode::DropPoint;
    TreePtr base = seed % 2 ? sorgenfreyTree() : standardTree();
    size_t len = rng() % 3;
    if (mode == CorruptMode::LeafEscape && len == 0) len = 1;
    NodePath at;
    for (size_t i = 0; i < len; ++i) at.push_back(rng() % 3);
    uint64_t son = rng() % 5;

    Report rep = baireFoliageSuite(*corruptTree(base, at, son, mode), 4, 8);
    bool witnessed = false;
    for (const auto& e : rep.checks)
      if (e.status == CheckStatus::Fail && e.witness.contains("node"))
        witnessed = true;
    if (!rep.anyFail() || !witnessed) {
      note = "seed " + std::to_string(seed) + " (" + corruptModeName(mode) +
             ") slipped through";
      return false;
    }
  }
  // the same suite parameters stay green on the honest trees
  for (const auto& base : {standardTree(), sorgenfreyTree()})
    if (baireFoliageSuite(*base, 4, 8).exitCode() != 0) {
      note = "honest tree flagged by the suite";
      return false;
    }
  return true;
}

int main() {
  criterion(1, "rise identity on the standard tree", 1000, riseIdentity);
  criterion(2, "baire foliage suite across the catalog", 30000, foliageSuites);
  criterion(3, "product decomposition identity", 10000, productDecomposition);
  criterion(4, "filter shift meeting images", 1000, filterShift);
  criterion(5, "rescale height identity and rise transfer", 10000, rescaleChecks);
  criterion(6, "cocountable subspace suite", 10000, cocountableChecks);
  criterion(7, "hybrid closure oracle", 10000, hybridOracle);
  criterion(8, "fault injection across the suites", 0, faultInjection);
  return failures == 0 ? 0 : 1;
}
