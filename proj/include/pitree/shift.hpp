#pragma once

/****************************************************************************
 * Filter shift: turning per-coordinate certificate families into strictly
 * increasing reindexing maps whose images always meet.
 *
 * Certificates are countable-intent families of subsets of omega, each set
 * in one of four closed forms that support exact membership, successor and
 * subset queries.  The recursion picks f_i(n) greedily as the least element
 * of the first i+1 certificate sets above the previous pick, spaces the
 * landmark sequence h so that consecutive gaps dominate every coordinate's
 * f-gaps, and defines alpha_n as the minimal strictly increasing extension
 * of f_l(n) |-> h_{n+l}.  All choices are the minimal ones, so the output
 * is canonical and its small values can be frozen into tests.
 ****************************************************************************/

#include <algorithm>
#include <memory>
#include <set>
#include <vector>

#include "pitree/point.hpp"

namespace pitree {

/* ----- one subset of omega in closed form ----- */

class FilterSet {
 public:
  enum class Kind : uint8_t { Explicit, CofiniteBelow, CofiniteOmit, Arith };

  static FilterSet explicitSet(std::vector<uint64_t> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.empty()) throw ConfigError("an explicit filter set cannot be empty");
    FilterSet s;
    s.kind_ = Kind::Explicit;
    s.xs_ = std::move(xs);
    return s;
  }

  // everything from m on
  static FilterSet cofiniteBelow(uint64_t m) {
    FilterSet s;
    s.kind_ = Kind::CofiniteBelow;
    s.a_ = m;
    return s;
  }

  // omega minus finitely many named values
  static FilterSet cofiniteOmit(std::vector<uint64_t> omit) {
    std::sort(omit.begin(), omit.end());
    omit.erase(std::unique(omit.begin(), omit.end()), omit.end());
    FilterSet s;
    s.kind_ = Kind::CofiniteOmit;
    s.xs_ = std::move(omit);
    return s;
  }

  // the progression first, first+step, first+2 step, ...
  static FilterSet arith(uint64_t step, uint64_t first) {
    if (step == 0) throw ConfigError("arithmetic filter set needs step >= 1");
    FilterSet s;
    s.kind_ = Kind::Arith;
    s.a_ = step;
    s.b_ = first;
    return s;
  }

  Kind kind() const { return kind_; }
  bool isInfinite() const { return kind_ != Kind::Explicit; }

  bool contains(uint64_t x) const {
    switch (kind_) {
      case Kind::Explicit:
        return std::binary_search(xs_.begin(), xs_.end(), x);
      case Kind::CofiniteBelow:
        return x >= a_;
      case Kind::CofiniteOmit:
        return !std::binary_search(xs_.begin(), xs_.end(), x);
      case Kind::Arith:
        return x >= b_ && (x - b_) % a_ == 0;
    }
    return false;
  }

  // least element strictly above x (x = -1 asks for the least element)
  std::optional<int64_t> nextAfter(int64_t x) const {
    uint64_t from = x < 0 ? 0 : (uint64_t)x + 1;
    switch (kind_) {
      case Kind::Explicit: {
        auto it = std::lower_bound(xs_.begin(), xs_.end(), from);
        if (it == xs_.end()) return std::nullopt;
        return (int64_t)*it;
      }
      case Kind::CofiniteBelow:
        return (int64_t)std::max(from, a_);
      case Kind::CofiniteOmit: {
        uint64_t c = from;
        while (std::binary_search(xs_.begin(), xs_.end(), c)) ++c;
        return (int64_t)c;
      }
      case Kind::Arith: {
        if (from <= b_) return (int64_t)b_;
        return (int64_t)(b_ + a_ * ((from - b_ + a_ - 1) / a_));
      }
    }
    return std::nullopt;
  }

  // exact subset decision between the closed forms
  bool subsetOf(const FilterSet& o) const {
    if (kind_ == Kind::Explicit) {
      for (uint64_t x : xs_)
        if (!o.contains(x)) return false;
      return true;
    }
    if (o.kind() == Kind::Explicit) return false;  // infinite vs finite
    switch (o.kind()) {
      case Kind::CofiniteBelow:
        // everything of this set must sit at or above o's threshold
        switch (kind_) {
          case Kind::CofiniteBelow: return a_ >= o.a_;
          case Kind::CofiniteOmit:
            for (uint64_t x = 0; x < o.a_; ++x)
              if (contains(x)) return false;
            return true;
          case Kind::Arith: return b_ >= o.a_;
          default: return false;
        }
      case Kind::CofiniteOmit:
        // none of o's omitted values may belong here
        for (uint64_t x : o.xs_)
          if (contains(x)) return false;
        return true;
      case Kind::Arith:
        switch (kind_) {
          case Kind::Arith:
            return o.a_ != 0 && a_ % o.a_ == 0 && b_ >= o.b_ &&
                   (b_ - o.b_) % o.a_ == 0;
          case Kind::CofiniteBelow:
          case Kind::CofiniteOmit:
            // a set with bounded gaps fits in a progression only if the
            // progression is all of a tail, i.e. step 1
            if (o.a_ != 1) return false;
            for (uint64_t x = 0; x < o.b_; ++x)
              if (contains(x)) return false;
            return true;
          default: return false;
        }
      default: return false;
    }
  }

  Json toJson() const {
    switch (kind_) {
      case Kind::Explicit: return Json{{"explicit", Json{{"values", xs_}}}};
      case Kind::CofiniteBelow: return Json{{"cofinite", Json{{"below", a_}}}};
      case Kind::CofiniteOmit: return Json{{"omit", Json{{"values", xs_}}}};
      case Kind::Arith:
        return Json{{"arith", Json{{"step", a_}, {"first", b_}}}};
    }
    return Json();
  }

  static FilterSet fromJson(const Json& j) {
    if (!j.is_object() || j.size() != 1)
      throw ConfigError("malformed filter set: " + j.dump());
    if (j.contains("explicit"))
      return explicitSet(j.at("explicit").at("values").get<std::vector<uint64_t>>());
    if (j.contains("cofinite"))
      return cofiniteBelow(j.at("cofinite").at("below").get<uint64_t>());
    if (j.contains("omit"))
      return cofiniteOmit(j.at("omit").at("values").get<std::vector<uint64_t>>());
    if (j.contains("arith"))
      return arith(j.at("arith").at("step").get<uint64_t>(),
                   j.at("arith").at("first").get<uint64_t>());
    throw ConfigError("unknown filter set form: " + j.dump());
  }

 private:
  Kind kind_ = Kind::CofiniteBelow;
  std::vector<uint64_t> xs_;
  uint64_t a_ = 0, b_ = 0;
};

/* ----- certificate families ----- */

// a countable-intent family given by finitely many representatives; the
// enumeration G_i cycles through them, which leaves the generated filter
// unchanged
struct FilterCert {
  std::vector<FilterSet> sets;

  const FilterSet& at(size_t i) const {
    if (sets.empty()) throw ConfigError("empty filter certificate");
    return sets[i % sets.size()];
  }

  Json toJson() const {
    Json arr = Json::array();
    for (const auto& s : sets) arr.push_back(s.toJson());
    return Json{{"sets", std::move(arr)}};
  }

  static FilterCert fromJson(const Json& j) {
    FilterCert c;
    if (j.contains("ladder")) {
      uint64_t upTo = j.at("ladder").at("upTo").get<uint64_t>();
      for (uint64_t m = 0; m <= upTo; ++m)
        c.sets.push_back(FilterSet::cofiniteBelow(m));
      return c;
    }
    if (j.contains("arithLadder")) {
      uint64_t step = j.at("arithLadder").at("step").get<uint64_t>();
      uint64_t upTo = j.at("arithLadder").at("upTo").get<uint64_t>();
      if (step == 0) throw ConfigError("arithLadder needs step >= 1");
      for (uint64_t m = 0; m <= upTo; ++m)
        c.sets.push_back(FilterSet::arith(step, step * ((m + step - 1) / step)));
      return c;
    }
    if (j.contains("sets")) {
      for (const auto& s : j.at("sets")) c.sets.push_back(FilterSet::fromJson(s));
      if (c.sets.empty()) throw ConfigError("filter certificate lists no sets");
      return c;
    }
    throw ConfigError("unknown filter certificate form: " + j.dump());
  }
};

/* ----- the shift recursion ----- */

namespace detail {

struct ShiftState {
  std::vector<FilterCert> delta;
  std::vector<FilterCert> gamma;  // gamma[0] unused
  uint32_t lambda = 0;
  uint64_t scanCap = 1 << 20;

  std::vector<std::vector<int64_t>> f;  // computed prefixes, f[n][i]
  std::vector<int64_t> h;

  int64_t fAt(uint32_t n, int64_t i) {
    if (i < 0) return -1;
    auto& col = f[n];
    while ((int64_t)col.size() <= i) {
      int64_t prev = col.empty() ? -1 : col.back();
      size_t idx = col.size();
      if (n == 0) {
        // F(0) is the first certificate set of delta_0, read off in order
        auto nx = delta[0].sets.front().nextAfter(prev);
        if (!nx)
          throw FIPViolation("the base certificate set ran out of elements");
        col.push_back(*nx);
        continue;
      }
      // least element of the first idx+1 gamma sets above the previous pick
      int64_t x = prev;
      uint64_t steps = 0;
      for (;;) {
        auto nx = gamma[n].at(idx).nextAfter(x);
        if (!nx) throw FIPViolation("certificate set exhausted in coordinate " +
                                    std::to_string(n));
        x = *nx;
        bool ok = true;
        for (size_t jj = 0; jj < idx && ok; ++jj)
          ok = gamma[n].at(jj).contains((uint64_t)x);
        if (ok) break;
        if (++steps > scanCap)
          throw FIPViolation("no common element found in coordinate " +
                             std::to_string(n) + " within the scan budget");
      }
      col.push_back(x);
    }
    return col[(size_t)i];
  }

  int64_t hAt(int64_t i) {
    if (i < 0) return -1;
    while ((int64_t)h.size() <= i) {
      int64_t idx = (int64_t)h.size();
      int64_t prev = idx == 0 ? -1 : h.back();
      int64_t best = 0;
      for (uint32_t j = 0; j < lambda && (int64_t)j <= idx; ++j)
        best = std::max(best, fAt(j, idx - j) - fAt(j, idx - j - 1));
      h.push_back(prev + best + 1);
    }
    return h[(size_t)i];
  }

  // minimal strictly increasing total extension of f_l(n) |-> h_{n+l}
  int64_t alphaAt(uint32_t n, int64_t x) {
    if (x < 0) return -1;
    int64_t l = 0;
    while (fAt(n, l) < x) ++l;
    if (fAt(n, l) == x) return hAt(n + l);
    if (l == 0) return x;  // below the first landmark, count up from zero
    return hAt(n + l - 1) + (x - fAt(n, l - 1));
  }
};

}  // end of namespace detail

// one of the produced reindexing maps, total and strictly increasing
class AlphaFn {
 public:
  AlphaFn(std::shared_ptr<detail::ShiftState> st, uint32_t n)
      : st_(std::move(st)), n_(n) {}

  uint64_t operator()(uint64_t x) const { return (uint64_t)st_->alphaAt(n_, (int64_t)x); }
  int64_t at(int64_t x) const { return st_->alphaAt(n_, x); }

  Json describe() const {
    return Json{{"shifted", Json{{"coordinate", n_}}}};
  }

 private:
  std::shared_ptr<detail::ShiftState> st_;
  uint32_t n_;
};

class ShiftResult {
 public:
  explicit ShiftResult(std::shared_ptr<detail::ShiftState> st) : st_(std::move(st)) {
    for (uint32_t n = 0; n < st_->lambda; ++n) alpha_.emplace_back(st_, n);
  }

  uint32_t lambda() const { return st_->lambda; }
  int64_t f(uint64_t i, uint32_t n) const { return st_->fAt(n, (int64_t)i); }
  int64_t h(uint64_t i) const { return st_->hAt((int64_t)i); }
  const std::vector<AlphaFn>& alpha() const { return alpha_; }

 private:
  std::shared_ptr<detail::ShiftState> st_;
  std::vector<AlphaFn> alpha_;
};

inline ShiftResult shiftFilters(std::vector<FilterCert> delta,
                                std::vector<FilterCert> gamma) {
  if (delta.size() < 2)
    throw LambdaTooSmall("the shift recursion needs at least two coordinates");
  if (gamma.size() != delta.size())
    throw ConfigError("delta and gamma must list the same coordinates");
  if (delta[0].sets.empty()) throw ConfigError("coordinate 0 has no certificate");
  for (size_t n = 1; n < delta.size(); ++n) {
    if (delta[n].sets.empty() || gamma[n].sets.empty())
      throw ConfigError("coordinate " + std::to_string(n) + " has no certificate");
    // every delta set must absorb some gamma set
    for (const auto& d : delta[n].sets) {
      bool refined = false;
      for (const auto& g : gamma[n].sets)
        if (g.subsetOf(d)) {
          refined = true;
          break;
        }
      if (!refined)
        throw NotRefining("gamma does not refine delta in coordinate " +
                          std::to_string(n));
    }
  }
  auto st = std::make_shared<detail::ShiftState>();
  st->lambda = (uint32_t)delta.size();
  st->delta = std::move(delta);
  st->gamma = std::move(gamma);
  st->f.resize(st->lambda);
  // force a prefix now so certificate problems surface at build time
  st->hAt((int64_t)std::max<uint32_t>(8, 2 * st->lambda));
  return ShiftResult(std::move(st));
}

/* ----- the meeting-images condition ----- */

struct ClubEntry {
  std::vector<size_t> pick;      // which certificate set was chosen per coordinate
  std::vector<uint64_t> common;  // the intersection of the images below the bound
};

struct ClubReport {
  bool pass = true;
  uint64_t bound = 0;
  size_t minCommon = 0;
  std::vector<ClubEntry> entries;
};

// image of one certificate set under alpha, truncated below the bound
inline std::vector<uint64_t> alphaImageBelow(const AlphaFn& alpha, const FilterSet& d,
                                             uint64_t bound) {
  std::vector<uint64_t> out;
  int64_t x = -1;
  for (;;) {
    auto nx = d.nextAfter(x);
    if (!nx) break;
    x = *nx;
    uint64_t y = alpha((uint64_t)x);
    if (y >= bound) break;  // alpha is increasing, nothing more below the bound
    out.push_back(y);
  }
  return out;
}

// every choice of one set per coordinate must yield images with at least
// minCommon common elements below the bound
inline ClubReport checkClubCondition(const ShiftResult& sr,
                                     const std::vector<FilterCert>& delta,
                                     uint64_t bound = 200, size_t minCommon = 3) {
  if (delta.size() != sr.lambda())
    throw ConfigError("delta does not match the shift result's coordinates");
  ClubReport rep;
  rep.bound = bound;
  rep.minCommon = minCommon;
  std::vector<size_t> pick(delta.size(), 0);
  for (;;) {
    std::set<uint64_t> common;
    for (size_t n = 0; n < delta.size(); ++n) {
      auto img = alphaImageBelow(sr.alpha()[n], delta[n].sets[pick[n]], bound);
      std::set<uint64_t> s(img.begin(), img.end());
      if (n == 0) {
        common = std::move(s);
      } else {
        std::set<uint64_t> inter;
        std::set_intersection(common.begin(), common.end(), s.begin(), s.end(),
                              std::inserter(inter, inter.begin()));
        common = std::move(inter);
      }
    }
    ClubEntry e;
    e.pick = pick;
    e.common.assign(common.begin(), common.end());
    if (e.common.size() < minCommon) rep.pass = false;
    rep.entries.push_back(std::move(e));
    size_t n = 0;
    while (n < delta.size() && ++pick[n] == delta[n].sets.size()) pick[n++] = 0;
    if (n == delta.size()) break;
  }
  return rep;
}

}  // end of namespace pitree
