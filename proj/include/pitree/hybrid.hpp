#pragma once

/****************************************************************************
 * The grafting calculus.
 *
 * A graft replaces the segment of a host tree between a root node and a
 * designated antichain of descendants (its max nodes) with new interior
 * nodes; a consistent family of grafts is spliced in all at once and every
 * leaf of the result loses the union of the cuts.
 *
 * Two layers.  Finite explicit trees with integer labels carry the exact
 * definition and a brute-force transitive-closure oracle; the production
 * hybrid is built from the sons formula and is compared against the oracle
 * on random instances.  Lazily presented foliage grafts (a small foliage
 * tree fragment whose boundary nodes are tagged with host paths) drive the
 * infinite constructions: block grafts insert the rescaling block levels
 * and drop-point grafts reattach the off-branch sons along a removed
 * point's scope.
 ****************************************************************************/

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "pitree/rescale.hpp"
#include "pitree/tree.hpp"

namespace pitree {

/* ----- finite explicit trees ----- */

// nodes are integer labels; lt is kept transitively closed, so shared
// labels decide membership questions between a host and its grafts
struct FinTree {
  std::vector<int> labels;             // sorted, unique
  std::vector<std::vector<bool>> lt;   // lt[i][j]: labels[i] < labels[j]

  static FinTree make(std::vector<int> names,
                      const std::vector<std::pair<int, int>>& below) {
    FinTree t;
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    t.labels = std::move(names);
    size_t n = t.labels.size();
    t.lt.assign(n, std::vector<bool>(n, false));
    for (const auto& [a, b] : below) {
      int i = t.idx(a), j = t.idx(b);
      if (i < 0 || j < 0) throw ConfigError("order pair uses an unknown label");
      t.lt[i][j] = true;
    }
    t.close();
    return t;
  }

  int idx(int v) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), v);
    if (it == labels.end() || *it != v) return -1;
    return int(it - labels.begin());
  }
  bool has(int v) const { return idx(v) >= 0; }
  bool less(int a, int b) const {
    int i = idx(a), j = idx(b);
    return i >= 0 && j >= 0 && lt[i][j];
  }

  void close() {
    size_t n = labels.size();
    for (size_t k = 0; k < n; ++k)
      for (size_t i = 0; i < n; ++i)
        if (lt[i][k])
          for (size_t j = 0; j < n; ++j)
            if (lt[k][j]) lt[i][j] = true;
  }

  // why this is not a tree order, or nullopt when it is one
  std::optional<std::string> violation() const {
    size_t n = labels.size();
    for (size_t i = 0; i < n; ++i)
      if (lt[i][i]) return "label " + std::to_string(labels[i]) + " lies below itself";
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        if (lt[i][j])
          for (size_t k = 0; k < n; ++k)
            if (lt[k][j] && i != k && !lt[i][k] && !lt[k][i])
              return "predecessors of " + std::to_string(labels[j]) +
                     " are not a chain";
    return std::nullopt;
  }

  std::vector<int> sonsOf(int v) const {
    std::vector<int> out;
    int i = idx(v);
    if (i < 0) return out;
    size_t n = labels.size();
    for (size_t s = 0; s < n; ++s) {
      if (!lt[i][s]) continue;
      bool direct = true;
      for (size_t m = 0; m < n; ++m)
        if (lt[i][m] && lt[m][s]) direct = false;
      if (direct) out.push_back(labels[s]);
    }
    return out;
  }

  std::vector<int> maxels() const {
    std::vector<int> out;
    size_t n = labels.size();
    for (size_t i = 0; i < n; ++i) {
      bool top = true;
      for (size_t j = 0; j < n; ++j)
        if (lt[i][j]) top = false;
      if (top) out.push_back(labels[i]);
    }
    return out;
  }

  std::optional<int> least() const {
    size_t n = labels.size();
    for (size_t i = 0; i < n; ++i) {
      bool bottom = true;
      for (size_t j = 0; j < n; ++j)
        if (j != i && !lt[i][j]) bottom = false;
      if (bottom) return labels[i];
    }
    return std::nullopt;
  }

  bool operator==(const FinTree& o) const {
    return labels == o.labels && lt == o.lt;
  }
};

struct GraftCheck {
  bool ok = true;
  std::string reason;
};

inline std::vector<int> implOf(const FinTree& g) {
  auto least = g.least();
  auto mx = g.maxels();
  std::vector<int> out;
  for (int v : g.labels) {
    if (least && v == *least) continue;
    if (std::find(mx.begin(), mx.end(), v) != mx.end()) continue;
    out.push_back(v);
  }
  return out;
}

inline GraftCheck isGraft(const FinTree& host, const FinTree& g) {
  if (g.labels.size() < 2) return {false, "a graft needs more than one node"};
  auto least = g.least();
  if (!least) return {false, "a graft needs a least node"};
  auto mx = g.maxels();
  for (int v : g.labels) {
    bool shared = host.has(v);
    bool boundary = v == *least ||
                    std::find(mx.begin(), mx.end(), v) != mx.end();
    if (shared && !boundary)
      return {false, "interior node " + std::to_string(v) + " belongs to the host"};
    if (!shared && boundary)
      return {false, "boundary node " + std::to_string(v) + " is not a host node"};
  }
  for (int a : g.labels)
    for (int b : g.labels) {
      if (!host.has(a) || !host.has(b)) continue;
      if (g.less(a, b) != host.less(a, b))
        return {false, "orders disagree on the shared pair " + std::to_string(a) +
                           ", " + std::to_string(b)};
    }
  return {};
}

// host nodes strictly above the graft root that sit under no max node
inline std::vector<int> explOf(const FinTree& host, const FinTree& g) {
  int root = *g.least();
  auto mx = g.maxels();
  std::vector<int> out;
  for (int v : host.labels) {
    if (!host.less(root, v)) continue;
    bool covered = false;
    for (int m : mx)
      if (m == v || host.less(m, v)) covered = true;
    if (!covered) out.push_back(v);
  }
  return out;
}

inline std::optional<std::string> familyViolation(const FinTree& host,
                                                  const std::vector<FinTree>& fam) {
  for (const auto& g : fam) {
    GraftCheck c = isGraft(host, g);
    if (!c.ok) return c.reason;
  }
  for (size_t a = 0; a < fam.size(); ++a)
    for (size_t b = a + 1; b < fam.size(); ++b) {
      auto ia = implOf(fam[a]);
      auto ib = implOf(fam[b]);
      for (int v : ia)
        if (std::find(ib.begin(), ib.end(), v) != ib.end())
          return "interior node " + std::to_string(v) + " is claimed twice";
      int ra = *fam[a].least(), rb = *fam[b].least();
      bool parallel = ra != rb && !host.less(ra, rb) && !host.less(rb, ra);
      auto sitsBeyond = [&](int r, const FinTree& g) {
        for (int m : g.maxels())
          if (m == r || host.less(m, r)) return true;
        return false;
      };
      if (!parallel && !sitsBeyond(ra, fam[b]) && !sitsBeyond(rb, fam[a]))
        return "roots " + std::to_string(ra) + " and " + std::to_string(rb) +
               " overlap without covering each other";
    }
  return std::nullopt;
}

inline std::vector<int> suppOf(const FinTree& host, const std::vector<FinTree>& fam) {
  std::set<int> gone;
  for (const auto& g : fam)
    for (int v : explOf(host, g)) gone.insert(v);
  std::vector<int> out;
  for (int v : host.labels)
    if (!gone.count(v)) out.push_back(v);
  return out;
}

namespace detail {

inline std::vector<int> hybridLabels(const FinTree& host,
                                     const std::vector<FinTree>& fam) {
  std::vector<int> labels = suppOf(host, fam);
  for (const auto& g : fam)
    for (int v : implOf(g)) labels.push_back(v);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

}  // end of namespace detail

// the hybrid via the sons formula: a node keeps its graft sons at the graft
// root and on graft interiors, and its host sons everywhere else
inline FinTree hybr(const FinTree& host, const std::vector<FinTree>& fam) {
  if (auto why = familyViolation(host, fam)) throw InconsistentFamily(*why);
  FinTree h;
  h.labels = detail::hybridLabels(host, fam);
  size_t n = h.labels.size();
  h.lt.assign(n, std::vector<bool>(n, false));
  for (int v : h.labels) {
    const FinTree* owner = nullptr;
    for (const auto& g : fam) {
      auto impl = implOf(g);
      if (v == *g.least() || std::find(impl.begin(), impl.end(), v) != impl.end())
        owner = &g;
    }
    std::vector<int> sons = owner ? owner->sonsOf(v) : host.sonsOf(v);
    for (int s : sons) {
      if (!h.has(s))
        throw InconsistentFamily("son " + std::to_string(s) +
                                 " of node " + std::to_string(v) +
                                 " fell out of the hybrid");
      h.lt[h.idx(v)][h.idx(s)] = true;
    }
  }
  h.close();
  return h;
}

// the oracle: restrict the union of all orders to the hybrid node set and
// close it transitively, straight from the definition
inline FinTree hybrByClosure(const FinTree& host, const std::vector<FinTree>& fam) {
  if (auto why = familyViolation(host, fam)) throw InconsistentFamily(*why);
  FinTree h;
  h.labels = detail::hybridLabels(host, fam);
  size_t n = h.labels.size();
  h.lt.assign(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      int a = h.labels[i], b = h.labels[j];
      if (host.less(a, b)) h.lt[i][j] = true;
      for (const auto& g : fam)
        if (g.less(a, b)) h.lt[i][j] = true;
    }
  h.close();
  return h;
}

/* ----- random instances for the closure oracle ----- */

// a random parent-pointer tree on labels 0..n-1
inline FinTree randomFinHost(std::mt19937& rng, int n) {
  std::vector<int> names;
  std::vector<std::pair<int, int>> below;
  for (int i = 0; i < n; ++i) {
    names.push_back(i);
    if (i > 0) below.push_back({int(rng() % i), i});
  }
  return FinTree::make(names, below);
}

// a random graft: a host root with descendants, a shuffled antichain of max
// nodes above it, a fresh interior chain, and the max nodes hung on random
// graft nodes so no interior node is childless
inline FinTree randomFinGraft(const FinTree& host, std::mt19937& rng, int freshBase) {
  auto strictAbove = [&](int v) {
    std::vector<int> out;
    for (int w : host.labels)
      if (host.less(v, w)) out.push_back(w);
    return out;
  };
  std::vector<int> roots;
  for (int v : host.labels)
    if (!strictAbove(v).empty()) roots.push_back(v);
  int r = roots[rng() % roots.size()];
  auto desc = strictAbove(r);
  std::shuffle(desc.begin(), desc.end(), rng);
  size_t want = 1 + rng() % 3;
  std::vector<int> mx;
  for (int v : desc) {
    bool par = true;
    for (int m : mx)
      if (host.less(m, v) || host.less(v, m)) par = false;
    if (par) mx.push_back(v);
    if (mx.size() == want) break;
  }
  std::vector<int> nodes{r};
  std::vector<int> pool{r};
  std::vector<std::pair<int, int>> ed;
  size_t nImpl = rng() % 3;
  for (size_t j = 0; j < nImpl; ++j) {
    int v = freshBase + int(j);
    ed.push_back({pool.back(), v});
    pool.push_back(v);
    nodes.push_back(v);
  }
  for (size_t j = 0; j < mx.size(); ++j) {
    int parent = j == 0 ? pool.back() : pool[rng() % pool.size()];
    ed.push_back({parent, mx[j]});
    nodes.push_back(mx[j]);
  }
  return FinTree::make(nodes, ed);
}

inline std::vector<FinTree> randomFinFamily(const FinTree& host, std::mt19937& rng) {
  std::vector<FinTree> fam;
  size_t want = 1 + rng() % 3;
  for (int tries = 0; tries < 40 && fam.size() < want; ++tries) {
    fam.push_back(randomFinGraft(host, rng, 100 * int(fam.size() + 1)));
    if (familyViolation(host, fam)) fam.pop_back();
  }
  return fam;
}

struct OracleInstance {
  FinTree host;
  std::vector<FinTree> family;
};

inline OracleInstance randomOracleInstance(std::mt19937& rng, int maxHostNodes = 60) {
  int span = std::max(1, maxHostNodes - 1);
  FinTree host = randomFinHost(rng, 2 + int(rng() % span));
  auto fam = randomFinFamily(host, rng);
  return OracleInstance{std::move(host), std::move(fam)};
}

// compares the sons-formula hybrid against the transitive-closure oracle
// and checks the order embedding and support properties; returns the first
// discrepancy, if any
inline std::optional<std::string> oracleMismatch(const FinTree& host,
                                                 const std::vector<FinTree>& fam) {
  FinTree a = hybr(host, fam);
  FinTree b = hybrByClosure(host, fam);
  if (!(a == b)) return "sons formula disagrees with the closure";
  if (auto why = a.violation()) return "hybrid is not a tree: " + *why;
  for (int v : a.labels)
    if (a.sonsOf(v) != b.sonsOf(v))
      return "son lists differ at node " + std::to_string(v);
  for (const auto& g : fam)
    for (int x : g.labels) {
      if (!a.has(x)) return "graft node " + std::to_string(x) + " missing";
      for (int y : g.labels)
        if (a.less(x, y) != g.less(x, y))
          return "graft order violated between " + std::to_string(x) + " and " +
                 std::to_string(y);
    }
  auto supp = suppOf(host, fam);
  std::vector<int> shared;
  for (int v : a.labels)
    if (host.has(v)) shared.push_back(v);
  if (shared != supp) return "shared nodes differ from the support";
  for (int x : supp)
    for (int y : supp)
      if (a.less(x, y) != host.less(x, y))
        return "host order violated between " + std::to_string(x) + " and " +
               std::to_string(y);
  return std::nullopt;
}

/* ----- lazily presented foliage grafts ----- */

// a foliage graft is a small foliage tree over local paths; the root sits
// at a host node and the nodes at maxel depth are tagged with host paths
class FoliageGraft {
 public:
  virtual ~FoliageGraft() = default;

  virtual const NodePath& at() const = 0;          // host path of the root
  virtual const TreePtr& frag() const = 0;         // the local foliage tree
  virtual uint64_t maxelDepth() const = 0;
  // the host node a boundary-level local node stands for
  virtual NodePath maxelHost(const NodePath& local) const = 0;
  // is some max node of this graft a prefix of (or equal to) the host path
  virtual bool coversBelow(const NodePath& hostPath) const = 0;
  // the points the splice removes from every leaf (the cut, as points)
  virtual std::vector<Point> cutPoints() const { return {}; }
  virtual Json describe() const = 0;
};

using GraftPtr = std::shared_ptr<const FoliageGraft>;

// the subtree of a host hanging at a fixed node, as a tree of its own
class SubtreeAt final : public FoliageTree {
 public:
  SubtreeAt(TreePtr base, NodePath at)
      : base_(std::move(base)), at_(std::move(at)) {
    if (!base_) throw ConfigError("subtree needs a base tree");
  }

  const Space& space() const override { return base_->space(); }
  ClopenSet rootLeaf() const override { return base_->leafAt(at_); }
  Json term() const override {
    return Json{{"subtree", Json{{"base", base_->term()}, {"at", at_}}}};
  }
  Json branchProxy(const NodePath& v) const override {
    return base_->branchProxy(glue(v));
  }
  bool certified() const override { return base_->certified(); }
  ClopenSet plainLeafBound(const NodePath& v) const override {
    return base_->plainLeafBound(glue(v));
  }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    return base_->sons(glue(v));
  }

 private:
  NodePath glue(const NodePath& v) const {
    NodePath w = at_;
    w.insert(w.end(), v.begin(), v.end());
    return w;
  }

  TreePtr base_;
  NodePath at_;
};

// the interpolating graft: one block of length k between a host node and
// its sons, with the son reached by a full block read off the tuple code
class BlockGraft final : public FoliageGraft {
 public:
  BlockGraft(TreePtr host, NodePath at, uint32_t k)
      : at_(std::move(at)), k_(k) {
    if (!host) throw ConfigError("block graft needs a host tree");
    if (k == 0) throw ConfigError("block graft needs a positive block length");
    frag_ = rescaleTree(std::make_shared<SubtreeAt>(std::move(host), at_),
                        AlphaMap::table({k - 1}, 1));
  }

  const NodePath& at() const override { return at_; }
  const TreePtr& frag() const override { return frag_; }
  uint64_t maxelDepth() const override { return k_; }

  NodePath maxelHost(const NodePath& local) const override {
    if (local.size() != k_) throw ConfigError("not a boundary node of the graft");
    NodePath m = at_;
    m.push_back(tupleEnc(local));
    return m;
  }

  bool coversBelow(const NodePath& hostPath) const override {
    return hostPath.size() > at_.size() && isPrefixOf(at_, hostPath);
  }

  Json describe() const override {
    return Json{{"block", Json{{"at", at_}, {"k", k_}}}};
  }

 private:
  NodePath at_;
  uint32_t k_;
  TreePtr frag_;
};

namespace detail {

// items of a drop-point graft: the off-branch sons along the scope of the
// dropped point, rows by descent depth, on-branch index skipped
struct DropChain {
  TreePtr host;
  NodePath at;
  Point p;
  Json term;
  uint64_t walkCap = 512;
  mutable std::vector<NodePath> nodes;
  mutable std::vector<uint64_t> sIdx;

  const NodePath& uAt(uint64_t t) const {
    if (nodes.empty()) nodes.push_back(at);
    while (nodes.size() <= t) {
      auto idx = host->sons(nodes.back())->locate(p);
      if (!idx)
        throw PartitionViolation("scope of the dropped point broke at " +
                                 pathToString(nodes.back()));
      sIdx.push_back(*idx);
      NodePath nx = nodes.back();
      nx.push_back(*idx);
      nodes.push_back(std::move(nx));
    }
    return nodes[t];
  }

  uint64_t sAt(uint64_t t) const {
    uAt(t + 1);
    return sIdx[t];
  }

  NodePath itemNode(uint64_t l) const {
    auto [t, jp] = cantorUnpair(l);
    uint64_t s = sAt(t);
    NodePath c = uAt(t);
    c.push_back(jp < s ? jp : jp + 1);
    return c;
  }
};

using DropChainPtr = std::shared_ptr<const DropChain>;

}  // end of namespace detail

// sons of a drop-point graft root; leaves are the untouched host leaves,
// the dropped point itself leaves through the root leaf only
class DropItemFamily final : public SonFamily {
 public:
  explicit DropItemFamily(detail::DropChainPtr chain) : chain_(std::move(chain)) {}

  ClopenSet leafAt(uint64_t l) const override {
    return chain_->host->leafAt(chain_->itemNode(l));
  }

  ClopenSet residual(uint64_t n) const override {
    auto& runs = rescache_;
    if (runs.empty()) runs.push_back(chain_->host->leafAt(chain_->at));
    while (runs.size() <= n) {
      uint64_t l = runs.size() - 1;
      auto d = difference(runs.back(), chain_->host->leafAt(chain_->itemNode(l)));
      if (!d || !d->plus.empty())
        throw PartitionViolation("graft residual did not peel exactly at item " +
                                 std::to_string(l));
      runs.push_back(d->core);
    }
    // the dropped point rides on the branch, so it sits in every run
    return ClopenSet::minus(runs[n], {chain_->p});
  }

  std::optional<uint64_t> locate(const Point& q) const override {
    for (uint64_t t = 0; t <= chain_->walkCap; ++t) {
      auto idx = chain_->host->sons(chain_->uAt(t))->locate(q);
      if (!idx) return std::nullopt;
      uint64_t s = chain_->sAt(t);
      if (*idx != s) return cantorPair(t, *idx < s ? *idx : *idx - 1);
    }
    return std::nullopt;
  }

  ClopenSet plainBound() const override {
    return chain_->host->plainLeafBound(chain_->at);
  }

  RefineDecision refines(const ClopenSet& target) const override {
    RefineDecision out;
    std::vector<uint64_t> exceptions;
    for (uint64_t t = 0; t <= rowCap_; ++t) {
      auto branchLeaf =
          ClopenSet::minus(chain_->host->leafAt(chain_->uAt(t)), {chain_->p});
      if (isSubset(branchLeaf, target) == Triv::Yes) {
        out.verdict = Triv::Yes;
        std::sort(exceptions.begin(), exceptions.end());
        out.exceptions = std::move(exceptions);
        out.tailFrom = out.exceptions.empty() ? 0 : out.exceptions.back() + 1;
        return out;
      }
      uint64_t s = chain_->sAt(t);
      RefineDecision rd = chain_->host->sons(chain_->uAt(t))->refines(target);
      if (rd.verdict == Triv::No) {
        out.verdict = Triv::No;
        out.note = "a row of off-branch sons escapes the target";
        for (uint64_t w : rd.witnesses)
          if (w != s) out.witnesses.push_back(cantorPair(t, w < s ? w : w - 1));
        return out;
      }
      if (rd.verdict == Triv::Unknown) {
        out.note = "row " + std::to_string(t) + " undecided: " + rd.note;
        return out;
      }
      for (uint64_t e : rd.exceptions)
        if (e != s) exceptions.push_back(cantorPair(t, e < s ? e : e - 1));
    }
    out.note = "row scan budget exhausted";
    return out;
  }

  Json describe() const override {
    return Json{{"family", "dropItems"}, {"term", chain_->term}};
  }

 private:
  detail::DropChainPtr chain_;
  uint64_t rowCap_ = 24;
  mutable std::vector<ClopenSet> rescache_;
};

// the two-level frag of a drop-point graft
class DropFragTree final : public FoliageTree {
 public:
  explicit DropFragTree(detail::DropChainPtr chain) : chain_(std::move(chain)) {}

  const Space& space() const override { return chain_->host->space(); }
  ClopenSet rootLeaf() const override {
    return ClopenSet::minus(chain_->host->leafAt(chain_->at), {chain_->p});
  }
  Json term() const override { return chain_->term; }
  Json branchProxy(const NodePath& v) const override {
    return chain_->host->branchProxy(v.empty() ? chain_->at
                                               : chain_->itemNode(v.front()));
  }
  ClopenSet plainLeafBound(const NodePath& v) const override {
    return chain_->host->plainLeafBound(v.empty() ? chain_->at
                                                  : chain_->itemNode(v.front()));
  }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    if (v.empty()) return std::make_shared<DropItemFamily>(chain_);
    return chain_->host->sons(chain_->itemNode(v.front()));
  }

 private:
  detail::DropChainPtr chain_;
};

// two-level graft that removes one point: max nodes are the off-branch
// sons along the point's scope, the root leaf loses exactly the point
class DropPointGraft final : public FoliageGraft {
 public:
  DropPointGraft(TreePtr host, NodePath at, Point p) {
    if (!host) throw ConfigError("drop-point graft needs a host tree");
    if (!pointInSpace(p, host->space()))
      throw SpaceMismatch("dropped point lies in another space");
    if (!member(p, host->leafAt(at)))
      throw PointOutsideRoot("dropped point lies outside the graft root leaf");
    auto chain = std::make_shared<detail::DropChain>();
    chain->host = std::move(host);
    chain->at = std::move(at);
    chain->p = std::move(p);
    chain->term = Json{{"dropPoint", Json{{"at", chain->at},
                                          {"point", pointToJson(chain->p)}}}};
    chain_ = chain;
    frag_ = std::make_shared<DropFragTree>(chain_);
  }

  const NodePath& at() const override { return chain_->at; }
  const TreePtr& frag() const override { return frag_; }
  uint64_t maxelDepth() const override { return 1; }

  NodePath maxelHost(const NodePath& local) const override {
    if (local.size() != 1) throw ConfigError("not a boundary node of the graft");
    return chain_->itemNode(local.front());
  }

  bool coversBelow(const NodePath& hostPath) const override {
    const NodePath& at = chain_->at;
    if (hostPath.size() <= at.size() || !isPrefixOf(at, hostPath)) return false;
    // above a max node means leaving the dropped point's branch somewhere
    for (uint64_t t = 0; at.size() + t < hostPath.size(); ++t)
      if (hostPath[at.size() + t] != chain_->sAt(t)) return true;
    return false;
  }

  std::vector<Point> cutPoints() const override { return {chain_->p}; }

  Json describe() const override { return chain_->term; }

 private:
  detail::DropChainPtr chain_;
  TreePtr frag_;
};

inline GraftPtr blockGraft(TreePtr host, NodePath at, uint32_t k) {
  return std::make_shared<BlockGraft>(std::move(host), std::move(at), k);
}

inline GraftPtr dropPointGraft(TreePtr host, NodePath at, Point p) {
  return std::make_shared<DropPointGraft>(std::move(host), std::move(at),
                                          std::move(p));
}

// the four graft clauses for a lazily presented graft; boundary tagging is
// structural here, so the checks probe leaves and the boundary map
inline GraftCheck graftCheck(const FoliageTree& host, const FoliageGraft& g,
                             uint64_t probe = 3) {
  const TreePtr& frag = g.frag();
  if (frag->space() != host.space()) return {false, "graft lives in another space"};
  if (equalSets(frag->sons({})->residual(0), ClopenSet::empty(host.space())) ==
      Triv::Yes)
    return {false, "a graft needs more than one node"};
  ClopenSet hostRoot = host.leafAt(g.at());
  if (isSubset(frag->rootLeaf(), hostRoot) != Triv::Yes)
    return {false, "graft root leaf is not inside the host leaf"};
  for (uint64_t i = 0; i < probe; ++i) {
    NodePath local(g.maxelDepth(), 0);
    local.back() = i;
    NodePath m = g.maxelHost(local);
    if (m.size() <= g.at().size() || !isPrefixOf(g.at(), m))
      return {false, "max node does not sit above the graft root"};
    if (!g.coversBelow(m)) return {false, "boundary map misses its own max node"};
    if (equalSets(frag->leafAt(local), host.leafAt(m)) != Triv::Yes)
      return {false, "max node leaf differs from the host leaf at " +
                         pathToString(m)};
  }
  return {};
}

/* ----- the foliage hybrid ----- */

namespace detail {

struct HybridCore {
  TreePtr host;
  std::vector<GraftPtr> grafts;
  std::vector<Point> loss;
  Json term;

  // position a hybrid node occupies: a surviving host node, or a spot
  // strictly inside one of the grafts
  struct Pos {
    NodePath hostPath;        // meaningful when graft is null
    const FoliageGraft* graft = nullptr;
    NodePath local;
  };

  const FoliageGraft* rootedAt(const NodePath& f) const {
    for (const auto& g : grafts)
      if (g->at() == f) return g.get();
    return nullptr;
  }

  Pos decode(const NodePath& vH) const {
    Pos pos;
    if (const FoliageGraft* g = rootedAt({})) {
      pos.graft = g;
    }
    for (uint64_t e : vH) {
      if (!pos.graft) {
        pos.hostPath.push_back(e);
      } else {
        pos.local.push_back(e);
        if (pos.local.size() == pos.graft->maxelDepth()) {
          pos.hostPath = pos.graft->maxelHost(pos.local);
          pos.graft = nullptr;
          pos.local.clear();
        }
      }
      if (!pos.graft)
        if (const FoliageGraft* g = rootedAt(pos.hostPath)) {
          pos.graft = g;
          pos.hostPath.clear();
        }
    }
    return pos;
  }

  std::vector<Point> lossInside(const ClopenSet& s) const {
    std::vector<Point> in;
    for (const auto& q : loss)
      if (member(q, s)) in.push_back(q);
    return in;
  }

  ClopenSet dropLoss(const ClopenSet& s) const {
    return ClopenSet::minus(s, lossInside(s));
  }
};

using HybridCorePtr = std::shared_ptr<const HybridCore>;

}  // end of namespace detail

// any son family with the loss points taken out of every leaf
class LossDropFamily final : public SonFamily {
 public:
  LossDropFamily(detail::HybridCorePtr core, FamilyPtr inner, NodePath vH)
      : core_(std::move(core)), inner_(std::move(inner)), vH_(std::move(vH)) {}

  ClopenSet leafAt(uint64_t i) const override {
    return core_->dropLoss(inner_->leafAt(i));
  }
  ClopenSet residual(uint64_t n) const override {
    return core_->dropLoss(inner_->residual(n));
  }
  uint64_t explicitCount() const override { return inner_->explicitCount(); }
  std::optional<uint64_t> locate(const Point& p) const override {
    return inner_->locate(p);
  }
  ClopenSet plainBound() const override { return inner_->plainBound(); }

  std::optional<StabilityInfo> stabilityFromBounds(const Bounds& b) const override {
    auto st = inner_->stabilityFromBounds(b);
    if (!st) return std::nullopt;
    // sons carrying a lost point may behave unlike their class
    for (const auto& q : core_->loss)
      if (member(q, inner_->plainBound()))
        if (auto idx = inner_->locate(q)) st->bound = std::max(st->bound, *idx + 1);
    return st;
  }

  RefineDecision refines(const ClopenSet& target) const override {
    RefineDecision rd = inner_->refines(target);
    if (rd.verdict != Triv::Yes) return rd;
    RefineDecision out;
    out.verdict = Triv::Yes;
    out.tailFrom = rd.tailFrom;
    out.note = rd.note;
    for (uint64_t e : rd.exceptions)
      if (isSubset(leafAt(e), target) != Triv::Yes) out.exceptions.push_back(e);
    return out;
  }

  Json describe() const override {
    return Json{{"family", "lossDrop"}, {"tree", core_->term}, {"path", vH_}};
  }
  std::optional<std::pair<Json, NodePath>> hostKey() const override {
    return std::make_pair(core_->term, vH_);
  }

 private:
  detail::HybridCorePtr core_;
  FamilyPtr inner_;
  NodePath vH_;
};

class HybridTree final : public FoliageTree {
 public:
  HybridTree(TreePtr host, std::vector<GraftPtr> grafts) {
    if (!host) throw ConfigError("hybrid needs a host tree");
    auto core = std::make_shared<detail::HybridCore>();
    for (const auto& g : grafts)
      if (!g) throw ConfigError("hybrid family holds an empty graft");
    for (size_t a = 0; a < grafts.size(); ++a)
      for (size_t b = a + 1; b < grafts.size(); ++b) {
        const NodePath& ra = grafts[a]->at();
        const NodePath& rb = grafts[b]->at();
        bool aBelowB = isPrefixOf(ra, rb);
        bool bBelowA = isPrefixOf(rb, ra);
        if (!aBelowB && !bBelowA) continue;  // parallel roots
        bool covered = (aBelowB && grafts[a]->coversBelow(rb)) ||
                       (bBelowA && grafts[b]->coversBelow(ra));
        if (!covered)
          throw InconsistentFamily("graft roots " + pathToString(ra) + " and " +
                                   pathToString(rb) +
                                   " overlap without covering each other");
      }
    Json arr = Json::array();
    for (const auto& g : grafts) {
      arr.push_back(g->describe());
      for (const auto& q : g->cutPoints()) {
        for (const auto& seen : core->loss)
          if (seen == q) throw InconsistentFamily("two grafts cut the same point");
        core->loss.push_back(q);
      }
    }
    core->term = Json{{"fhybr", Json{{"base", host->term()},
                                     {"grafts", std::move(arr)}}}};
    core->host = std::move(host);
    core->grafts = std::move(grafts);
    core_ = std::move(core);
  }

  const Space& space() const override { return core_->host->space(); }
  ClopenSet rootLeaf() const override {
    return core_->dropLoss(core_->host->rootLeaf());
  }
  Json term() const override { return core_->term; }

  Json branchProxy(const NodePath& v) const override {
    auto pos = core_->decode(v);
    if (!pos.graft) return core_->host->branchProxy(pos.hostPath);
    Json j = pos.graft->frag()->branchProxy(pos.local);
    j["graft"] = pos.graft->describe();
    return j;
  }

  ClopenSet plainLeafBound(const NodePath& v) const override {
    auto pos = core_->decode(v);
    if (!pos.graft) return core_->host->plainLeafBound(pos.hostPath);
    return pos.graft->frag()->plainLeafBound(pos.local);
  }

  // the host node or graft-local position behind a hybrid path
  std::pair<std::optional<NodePath>, NodePath> position(const NodePath& v) const {
    auto pos = core_->decode(v);
    if (!pos.graft) return {pos.hostPath, {}};
    return {std::nullopt, pos.local};
  }

  const std::vector<Point>& loss() const { return core_->loss; }
  const TreePtr& host() const { return core_->host; }

 protected:
  FamilyPtr makeSons(const NodePath& v) const override {
    auto pos = core_->decode(v);
    FamilyPtr inner = pos.graft ? pos.graft->frag()->sons(pos.local)
                                : core_->host->sons(pos.hostPath);
    if (core_->loss.empty()) return inner;
    return std::make_shared<LossDropFamily>(core_, std::move(inner), v);
  }

 private:
  detail::HybridCorePtr core_;
};

inline TreePtr fhybr(TreePtr host, std::vector<GraftPtr> grafts) {
  if (grafts.empty()) return host;
  return std::make_shared<HybridTree>(std::move(host), std::move(grafts));
}

/* ----- shoot preservation ----- */

struct ShootPreservation {
  Triv verdict = Triv::Unknown;
  Json witness;
  std::string note;
};

namespace detail {

// does every cofinite union of graft-son leaves at x eventually fit inside
// every cofinite union of host-son leaves at y
inline ShootPreservation shootDominates(const FoliageTree& host, const NodePath& y,
                                        const SonFamily& fam, uint64_t d) {
  ShootPreservation out;
  ClopenSet leafY = host.leafAt(y);
  bool finiteFan =
      equalSets(fam.residual(std::max<uint64_t>(fam.explicitCount(), 1)),
                ClopenSet::empty(host.space())) == Triv::Yes;
  if (finiteFan) {
    // each graft son meets some host son; removing those host sons leaves
    // a cofinite union no nonempty pack of graft sons can enter
    std::vector<uint64_t> removed;
    for (uint64_t i = 0; i < std::max<uint64_t>(fam.explicitCount(), 1); ++i) {
      ClopenSet g = fam.leafAt(i);
      if (equalSets(g, ClopenSet::empty(host.space())) == Triv::Yes) continue;
      Point q = samplePoint(g);
      auto idx = host.sons(y)->locate(q);
      if (!idx) {
        out.note = "graft son leaf leaks out of the host sons";
        return out;
      }
      removed.push_back(*idx);
    }
    out.verdict = Triv::No;
    out.witness = Json{{"hostNode", y}, {"removedHostSons", removed}};
    out.note = "finitely many graft sons all meet the removed host sons";
    return out;
  }
  RefineDecision whole = fam.refines(leafY);
  if (whole.verdict != Triv::Yes) {
    out.verdict = whole.verdict;
    out.note = "graft sons against the whole host leaf: " + whole.note;
    out.witness = Json{{"hostNode", y}};
    return out;
  }
  FamilyPtr hostFam = host.sons(y);
  for (uint64_t s = 0; s < d; ++s) {
    // everything except host son s: the leaves before it and the tail past it
    std::vector<ClopenSet> pieces;
    for (uint64_t j = 0; j < s; ++j) pieces.push_back(hostFam->leafAt(j));
    pieces.push_back(hostFam->residual(s + 1));
    RefineDecision rd =
        fam.refines(ClopenSet::finUnion(host.space(), std::move(pieces)));
    if (rd.verdict == Triv::Yes) continue;
    out.verdict = rd.verdict;
    out.witness = Json{{"hostNode", y}, {"avoidedSon", s}};
    out.note = "graft sons cannot avoid host son " + std::to_string(s) + ": " +
               rd.note;
    return out;
  }
  out.verdict = Triv::Yes;
  out.note = "checked the whole leaf and the first " + std::to_string(d) +
             " single-son removals";
  return out;
}

}  // end of namespace detail

// bounded check that a graft preserves shoots of its host: for sampled
// points of the graft flesh and every reachable host node the graft would
// explant, some graft node's shoots refine the host node's shoots
inline ShootPreservation preservesShoots(TreePtr host, const GraftPtr& g,
                                         uint64_t d) {
  if (!host || !g) throw ConfigError("shoot preservation needs a host and a graft");
  ShootPreservation out;
  const TreePtr& frag = g->frag();
  std::vector<Point> samples;
  try {
    samples.push_back(samplePoint(frag->rootLeaf()));
    for (uint64_t i = 0; i < d && samples.size() < d; ++i) {
      Point q = samplePoint(frag->sons({})->leafAt(i));
      if (member(q, frag->rootLeaf())) samples.push_back(std::move(q));
    }
  } catch (const PitreeError&) {
    // an unsampleable leaf just caps the sample list
  }
  if (samples.empty()) {
    out.note = "no sample point of the graft flesh is representable";
    return out;
  }
  bool bounded = false;
  for (const auto& p : samples) {
    // host nodes this graft explants along the point's branch, plus the root
    std::vector<NodePath> ys{g->at()};
    for (const NodePath& u : scope(*host, p, g->at().size() + d))
      if (u.size() > g->at().size() && isPrefixOf(g->at(), u) &&
          !g->coversBelow(u))
        ys.push_back(u);
    // scope stops short of the boundary level, which carries host shoots
    std::vector<NodePath> xs = scope(*frag, p, g->maxelDepth());
    for (const NodePath& y : ys) {
      bool passed = false;
      bool sawUnknown = false;
      ShootPreservation last;
      for (const NodePath& x : xs) {
        last = detail::shootDominates(*host, y, *frag->sons(x), d);
        if (last.verdict == Triv::Yes) {
          passed = true;
          break;
        }
        if (last.verdict == Triv::Unknown) sawUnknown = true;
      }
      if (passed) {
        bounded = true;
        continue;
      }
      if (sawUnknown) {
        out.verdict = Triv::Unknown;
        out.note = "undecided at a host node: " + last.note;
        out.witness = Json{{"point", pointToJson(p)}, {"hostNode", y}};
        return out;
      }
      out.verdict = Triv::No;
      out.witness = Json{{"point", pointToJson(p)}, {"hostNode", y},
                         {"detail", last.witness}};
      out.note = last.note;
      return out;
    }
  }
  out.verdict = bounded ? Triv::Yes : Triv::Unknown;
  out.note = "bounded pass over " + std::to_string(samples.size()) +
             " sample points to depth " + std::to_string(d);
  return out;
}

}  // end of namespace pitree
