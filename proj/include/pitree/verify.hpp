#pragma once

/****************************************************************************
 * Invariant suites over foliage trees.
 *
 * Each suite walks a bounded portion of a tree and files one report entry
 * per check, tagged with the clause it instantiates.  Violations and engine
 * errors become failed entries with a machine readable witness; checks the
 * set engine cannot settle are reported as inconclusive, never as passes.
 * Suites do not throw.  For a fixed tree, depth, son bound and sample list
 * the report is deterministic, entries follow the breadth first node order.
 ****************************************************************************/

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pitree/tree.hpp"

namespace pitree {

/* ----- reports ----- */

enum class CheckStatus { Pass, Fail, Inconclusive };

inline const char* checkStatusName(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    default: return "inconclusive";
  }
}

struct CheckEntry {
  std::string id;      // which check fired
  std::string clause;  // clause tag the check instantiates
  CheckStatus status = CheckStatus::Pass;
  Json witness;

  Json toJson() const {
    return Json{{"id", id},
                {"clause", clause},
                {"status", checkStatusName(status)},
                {"witness", witness}};
  }
};

struct Report {
  std::vector<CheckEntry> checks;

  void add(std::string id, std::string clause, CheckStatus st, Json w = Json::object()) {
    checks.push_back({std::move(id), std::move(clause), st, std::move(w)});
  }
  void absorb(Report o) {
    checks.insert(checks.end(), std::make_move_iterator(o.checks.begin()),
                  std::make_move_iterator(o.checks.end()));
  }

  bool anyFail() const {
    return std::any_of(checks.begin(), checks.end(),
                       [](const CheckEntry& c) { return c.status == CheckStatus::Fail; });
  }
  bool allPass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckEntry& c) { return c.status == CheckStatus::Pass; });
  }

  // 0 when everything passes, 1 on any violation, 3 when the only blemish
  // is an inconclusive check
  int exitCode() const {
    if (anyFail()) return 1;
    return allPass() ? 0 : 3;
  }

  Json toJson() const {
    Json arr = Json::array();
    for (const auto& c : checks) arr.push_back(c.toJson());
    return Json{{"checks", arr}};
  }
};

namespace detail {

inline CheckStatus fromTriv(Triv t) {
  if (t == Triv::Yes) return CheckStatus::Pass;
  return t == Triv::No ? CheckStatus::Fail : CheckStatus::Inconclusive;
}

// per-node verdicts folded into one entry; the first witness of the worst
// rank is kept
struct CheckAgg {
  std::string id, clause;
  CheckStatus status = CheckStatus::Pass;
  Json witness;
  uint64_t examined = 0;

  CheckAgg(std::string i, std::string c) : id(std::move(i)), clause(std::move(c)) {}

  static int rank(CheckStatus s) {
    if (s == CheckStatus::Fail) return 2;
    return s == CheckStatus::Inconclusive ? 1 : 0;
  }
  void note(CheckStatus s, Json w) {
    ++examined;
    if (rank(s) > rank(status)) {
      status = s;
      witness = std::move(w);
    }
  }
  void intoReport(Report& rep) const {
    Json w = status == CheckStatus::Pass ? Json{{"nodesExamined", examined}} : witness;
    rep.add(id, clause, status, std::move(w));
  }
};

// the separation measure quoted by the tree must reach its own bound;
// prefix style measures grow with depth, width measures shrink
inline bool proxyHolds(const Json& j) {
  if (!j.is_object()) return true;
  if (j.contains("ok") && j["ok"].is_boolean() && !j["ok"].get<bool>()) return false;
  if (j.contains("coordinates") && j["coordinates"].is_array())
    for (const auto& c : j["coordinates"])
      if (!proxyHolds(c)) return false;
  if (j.contains("value") && j.contains("required")) {
    const Json& v = j["value"];
    const Json& r = j["required"];
    if (v.is_number_integer() && r.is_number_integer())
      return v.get<uint64_t>() >= r.get<uint64_t>();
    if (v.is_string() && r.is_string())
      return !(parseRat(r.get<std::string>()) < parseRat(v.get<std::string>()));
  }
  return true;
}

}  // end of namespace detail

/* ----- the foliage suite ----- */

struct FoliageSuiteOptions {
  uint64_t nodeBudget = 2000;  // nodes examined over the whole walk
  uint64_t expandWidth = 3;    // sons descended into per node
  uint64_t deepSonBound = 8;   // explicit sons checked below the top levels
};

// walks the tree breadth first to depth d and checks, at every visited
// node: the residual run peels the leaf exactly son by son, explicit sons
// are pairwise disjoint, son leaves stay inside the node leaf and are
// nonempty, the residual never dries up, and the branch separation proxy
// reaches its bound.  The root leaf must cover the whole space.  N bounds
// the explicit enumeration near the root; partitions stay exact because
// residuals close every peel.
inline Report baireFoliageSuite(const FoliageTree& t, uint64_t d, uint64_t N,
                                FoliageSuiteOptions opt = {}) {
  Report rep;
  {
    CheckStatus st;
    Json w;
    try {
      st = detail::fromTriv(equalSets(t.rootLeaf(), ClopenSet::full(t.space())));
      if (st != CheckStatus::Pass) w["leaf"] = t.rootLeaf().toJson();
    } catch (const PitreeError& e) {
      st = CheckStatus::Fail;
      w["error"] = e.what();
    }
    rep.add("root-leaf", "(F0=X)", st, std::move(w));
  }

  detail::CheckAgg peel("locally-strict", "(loc-strict)");
  detail::CheckAgg disjoint("pairwise-disjoint", "(loc-strict)");
  detail::CheckAgg inside("nonincreasing", "(foliage)");
  detail::CheckAgg filled("nonempty-leaves", "(omega-omega)");
  detail::CheckAgg branching("omega-branching", "(omega-omega)");
  detail::CheckAgg proxy("strict-branch-proxy", "(strict-branches)");

  uint64_t visited = 0;
  std::vector<NodePath> frontier{{}};
  for (uint64_t level = 0; level < d && !frontier.empty(); ++level) {
    std::vector<NodePath> next;
    for (const auto& v : frontier) {
      if (visited >= opt.nodeBudget) break;
      ++visited;
      const uint64_t sonBound = level <= 1 ? N : std::min(N, opt.deepSonBound);
      Json at{{"node", pathToString(v)}};
      try {
        const FamilyPtr& fam = t.sons(v);
        ClopenSet leafV = t.leafAt(v);
        std::vector<ClopenSet> leaves;
        leaves.reserve(sonBound);
        for (uint64_t j = 0; j < sonBound; ++j) leaves.push_back(fam->leafAt(j));

        {
          CheckStatus st = CheckStatus::Pass;
          Json w = at;
          ClopenSet run = fam->residual(0);
          Triv eq0 = equalSets(run, leafV);
          if (eq0 != Triv::Yes) {
            st = detail::fromTriv(eq0);
            w["stage"] = "residual(0) vs leaf";
          } else {
            for (uint64_t j = 0; j < sonBound; ++j) {
              auto dd = difference(run, leaves[j]);
              if (!dd) {
                st = CheckStatus::Inconclusive;
                w["son"] = j;
                break;
              }
              ClopenSet claimed = fam->residual(j + 1);
              bool lost = false;
              for (const Point& q : dd->plus)
                if (!member(q, claimed)) {
                  // the point sits in the run, in no explicit son, and the
                  // claimed residual does not pick it up either
                  st = CheckStatus::Fail;
                  w["son"] = j;
                  w["lostPoint"] = pointToJson(q);
                  lost = true;
                  break;
                }
              if (lost) break;
              if (!dd->plus.empty()) {
                st = CheckStatus::Inconclusive;
                w["son"] = j;
                break;
              }
              Triv eq = equalSets(dd->core, claimed);
              if (eq != Triv::Yes) {
                st = detail::fromTriv(eq);
                w["son"] = j;
                break;
              }
              run = std::move(dd->core);
            }
          }
          peel.note(st, std::move(w));
        }

        {
          CheckStatus st = CheckStatus::Pass;
          Json w = at;
          for (uint64_t i = 0; i + 1 < sonBound && st != CheckStatus::Fail; ++i)
            for (uint64_t j = i + 1; j < sonBound; ++j) {
              Triv dj = areDisjoint(leaves[i], leaves[j]);
              if (dj == Triv::Yes) continue;
              st = detail::fromTriv(dj == Triv::No ? Triv::No : Triv::Unknown);
              w["sons"] = Json::array({i, j});
              if (st == CheckStatus::Fail) break;
            }
          disjoint.note(st, std::move(w));
        }

        {
          CheckStatus st = CheckStatus::Pass;
          Json w = at;
          for (uint64_t j = 0; j < sonBound; ++j) {
            Triv sub = isSubset(leaves[j], leafV);
            if (sub != Triv::Yes) {
              st = detail::fromTriv(sub);
              w["son"] = j;
              break;
            }
          }
          inside.note(st, std::move(w));
        }

        {
          CheckStatus st = CheckStatus::Pass;
          Json w = at;
          for (uint64_t j = 0; j < sonBound; ++j) {
            if (leaves[j].isEmptySet()) {
              st = CheckStatus::Fail;
              w["son"] = j;
              break;
            }
            try {
              samplePoint(leaves[j]);
            } catch (const PitreeError&) {
              st = CheckStatus::Inconclusive;
              w["son"] = j;
              break;
            }
          }
          filled.note(st, std::move(w));
        }

        {
          CheckStatus st = CheckStatus::Pass;
          Json w = at;
          w["after"] = sonBound;
          ClopenSet rest = fam->residual(sonBound);
          if (rest.isEmptySet()) {
            st = CheckStatus::Fail;
          } else {
            try {
              samplePoint(rest);
            } catch (const PitreeError&) {
              st = CheckStatus::Inconclusive;
            }
          }
          branching.note(st, std::move(w));
        }

        {
          Json pj = t.branchProxy(v);
          Json w = at;
          w["proxy"] = pj;
          proxy.note(detail::proxyHolds(pj) ? CheckStatus::Pass : CheckStatus::Fail,
                     std::move(w));
        }
      } catch (const PitreeError& e) {
        Json w = at;
        w["error"] = e.what();
        peel.note(CheckStatus::Fail, std::move(w));
        continue;
      }
      if (level + 1 < d)
        for (uint64_t i = 0; i < opt.expandWidth; ++i) {
          NodePath w = v;
          w.push_back(i);
          next.push_back(std::move(w));
        }
    }
    frontier = std::move(next);
  }

  peel.intoReport(rep);
  disjoint.intoReport(rep);
  inside.intoReport(rep);
  filled.intoReport(rep);
  branching.intoReport(rep);
  proxy.intoReport(rep);
  rep.add("coverage", "(walk)", CheckStatus::Pass,
          Json{{"nodesExamined", visited}, {"depth", d}, {"sonBound", N}});
  return rep;
}

/* ----- the grows-into suite ----- */

struct GrowsIntoSample {
  Point point;
  ClopenSet nbhd;
};

// rises each sampled point against its neighborhood and checks the known
// part is nonempty; trees built over the line or the irrationals promise a
// full tail of witness heights, point-removal constructions promise the
// odd heights from some level on
inline Report growsIntoSuite(const FoliageTree& t,
                             const std::vector<GrowsIntoSample>& samples, uint64_t d) {
  Report rep;
  const Json term = t.term();
  const bool pointRemoval = term.is_object() && term.contains("cocountable");
  const bool fullTail =
      term.is_object() && (term.contains("standard") || term.contains("sorgenfrey"));
  const std::string clause = pointRemoval ? "(♦)" : "(♥)";

  for (size_t k = 0; k < samples.size(); ++k) {
    const std::string id = "sample-" + std::to_string(k);
    try {
      RiseSet rs = rise(t, samples[k].point, samples[k].nbhd, d);
      Json w{{"point", pointToJson(samples[k].point)}, {"rise", rs.toJson()}};
      uint64_t m = d;
      while (m > 0 && rs.knownContains(m - 1)) --m;
      if (m < d) w["tailFrom"] = m;
      CheckStatus st = !rs.known.empty()
                           ? CheckStatus::Pass
                           : (rs.undecided.empty() ? CheckStatus::Fail
                                                   : CheckStatus::Inconclusive);
      rep.add(id, clause, st, w);

      if (fullTail) {
        CheckStatus ts = m < d ? CheckStatus::Pass
                               : (rs.undecided.empty() ? CheckStatus::Fail
                                                       : CheckStatus::Inconclusive);
        rep.add(id + "/tail", "(cofin)", ts, w);
      }
      if (pointRemoval) {
        uint64_t om = d;
        for (uint64_t h = d; h-- > 1;) {
          if (h % 2 == 0) continue;
          if (!rs.knownContains(h)) break;
          om = h;
        }
        Json ow = w;
        if (om < d) ow["oddTailFrom"] = om;
        CheckStatus os = om < d ? CheckStatus::Pass
                                : (rs.undecided.empty() ? CheckStatus::Fail
                                                        : CheckStatus::Inconclusive);
        rep.add(id + "/odd-tail", "(♠)", os, ow);
      }
    } catch (const PitreeError& e) {
      rep.add(id, clause, CheckStatus::Fail, Json{{"error", e.what()}});
    }
  }
  return rep;
}

/* ----- finite intersection checks ----- */

// pairwise and full meets of the known parts must be nonempty; an empty
// meet of depth-truncated sets is depth limited, not a refutation
inline Report fipCheck(const std::vector<RiseSet>& sets) {
  Report rep;
  auto meet = [](const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    std::vector<uint64_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  };

  CheckStatus pst = CheckStatus::Pass;
  Json pw;
  uint64_t pairs = 0;
  for (size_t i = 0; i < sets.size(); ++i)
    for (size_t j = i + 1; j < sets.size(); ++j) {
      ++pairs;
      if (meet(sets[i].known, sets[j].known).empty() && pst == CheckStatus::Pass) {
        pst = CheckStatus::Inconclusive;
        pw = Json{{"pair", Json::array({i, j})}, {"depthLimited", true}};
      }
    }
  if (pst == CheckStatus::Pass) pw = Json{{"pairsExamined", pairs}};
  rep.add("pairwise-fip", "(♣)", pst, std::move(pw));

  if (!sets.empty()) {
    std::vector<uint64_t> all = sets[0].known;
    for (size_t i = 1; i < sets.size(); ++i) all = meet(all, sets[i].known);
    rep.add("full-fip", "(♣)",
            all.empty() ? CheckStatus::Inconclusive : CheckStatus::Pass,
            all.empty() ? Json{{"depthLimited", true}} : Json{{"meet", all}});
  }
  return rep;
}

/* ----- fault injection ----- */

enum class CorruptMode { OverlapSons, LeafEscape, DropPoint };

inline const char* corruptModeName(CorruptMode m) {
  switch (m) {
    case CorruptMode::OverlapSons: return "overlap";
    case CorruptMode::LeafEscape: return "escape";
    default: return "missPoint";
  }
}

namespace detail {

class CorruptSonFamily final : public SonFamily {
 public:
  CorruptSonFamily(FamilyPtr inner, CorruptMode mode, uint64_t son,
                   std::optional<ClopenSet> outside)
      : inner_(std::move(inner)), mode_(mode), son_(son), outside_(std::move(outside)) {}

  ClopenSet leafAt(uint64_t i) const override {
    ClopenSet honest = inner_->leafAt(i);
    if (i != son_) return honest;
    switch (mode_) {
      case CorruptMode::OverlapSons:
        return ClopenSet::finUnion(honest.space(), {honest, inner_->leafAt(son_ + 1)});
      case CorruptMode::LeafEscape:
        return ClopenSet::finUnion(honest.space(), {honest, *outside_});
      default:
        return ClopenSet::minus(honest, {samplePoint(honest)});
    }
  }
  ClopenSet residual(uint64_t n) const override { return inner_->residual(n); }
  uint64_t explicitCount() const override { return inner_->explicitCount(); }
  std::optional<uint64_t> locate(const Point& p) const override { return inner_->locate(p); }
  ClopenSet plainBound() const override {
    ClopenSet b = inner_->plainBound();
    if (mode_ == CorruptMode::LeafEscape)
      return ClopenSet::finUnion(b.space(), {b, *outside_});
    return b;
  }
  Json describe() const override {
    return Json{{"family", "corrupt"},
                {"mode", corruptModeName(mode_)},
                {"son", son_},
                {"inner", inner_->describe()}};
  }

 private:
  FamilyPtr inner_;
  CorruptMode mode_;
  uint64_t son_;
  std::optional<ClopenSet> outside_;
};

}  // end of namespace detail

// plants one deliberate violation at the given node: two overlapping sons,
// a son leaking out of its node leaf, or a son silently dropping a point
// that no other leaf picks up
class CorruptedTree final : public FoliageTree {
 public:
  CorruptedTree(TreePtr base, NodePath at, uint64_t son, CorruptMode mode)
      : base_(std::move(base)), at_(std::move(at)), son_(son), mode_(mode) {
    if (!base_) throw ConfigError("corrupt tree needs a base");
    if (mode_ == CorruptMode::LeafEscape) {
      if (at_.empty()) throw ConfigError("a leaf can only escape below the root");
      NodePath sib = at_;
      sib.back() += 1;
      outside_ = base_->leafAt(sib);  // sibling leaf, disjoint from ours
    }
  }

  const Space& space() const override { return base_->space(); }
  ClopenSet rootLeaf() const override { return base_->rootLeaf(); }
  Json term() const override {
    return Json{{"corrupt",
                 {{"base", base_->term()},
                  {"at", at_},
                  {"son", son_},
                  {"mode", corruptModeName(mode_)}}}};
  }
  Json branchProxy(const NodePath& v) const override { return base_->branchProxy(v); }
  ClopenSet plainLeafBound(const NodePath& v) const override {
    return base_->plainLeafBound(v);
  }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    FamilyPtr inner = base_->sons(v);
    if (v != at_) return inner;
    return std::make_shared<detail::CorruptSonFamily>(inner, mode_, son_, outside_);
  }

 private:
  TreePtr base_;
  NodePath at_;
  uint64_t son_;
  CorruptMode mode_;
  std::optional<ClopenSet> outside_;
};

inline TreePtr corruptTree(TreePtr base, NodePath at, uint64_t son, CorruptMode mode) {
  return std::make_shared<CorruptedTree>(std::move(base), std::move(at), son, mode);
}

}  // end of namespace pitree
