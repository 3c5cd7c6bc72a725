#pragma once

/****************************************************************************
 * Declarative construction terms.  A config is a JSON term mirroring the
 * construction grammar; buildTree turns it into the corresponding tree.
 * The term() of every built tree is itself a valid config, so trees can be
 * rebuilt from their own descriptions.
 ****************************************************************************/

#include <string>
#include <utility>
#include <vector>

#include "pitree/cocountable.hpp"
#include "pitree/pipeline.hpp"
#include "pitree/sorgenfrey.hpp"
#include "pitree/standard.hpp"
#include "pitree/verify.hpp"

namespace pitree {

inline Space spaceFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("space"))
    throw ConfigError("malformed space: " + j.dump());
  const std::string k = j.at("space").get<std::string>();
  if (k == "baire") return Space::baire();
  if (k == "sorg") return Space::sorg();
  if (k == "product") {
    std::vector<Space> fs;
    for (const auto& f : j.at("factors")) fs.push_back(spaceFromJson(f));
    std::optional<uint32_t> lam;
    if (j.contains("lambda") && !j.at("lambda").is_string())
      lam = j.at("lambda").get<uint32_t>();
    return Space::product(lam, std::move(fs));
  }
  throw ConfigError("unknown space kind: " + k);
}

inline TreePtr buildTree(const Json& term) {
  if (!term.is_object() || term.size() != 1)
    throw ConfigError("a construction term must be a single-key object: " + term.dump());

  if (term.contains("standard")) return standardTree();
  if (term.contains("sorgenfrey")) return sorgenfreyTree();

  if (term.contains("product")) {
    const Json& p = term.at("product");
    std::optional<uint32_t> lambda;
    if (!p.contains("lambda")) throw ConfigError("product term without lambda");
    if (!p.at("lambda").is_string())
      lambda = p.at("lambda").get<uint32_t>();
    else if (p.at("lambda").get<std::string>() != "omega")
      throw ConfigError("lambda must be a number or \"omega\"");
    std::vector<TreePtr> comps;
    for (const auto& c : p.at("components")) comps.push_back(buildTree(c));
    return productTree(lambda, std::move(comps));
  }

  if (term.contains("rescale")) {
    const Json& r = term.at("rescale");
    return rescaleTree(buildTree(r.at("base")), AlphaMap::fromJson(r.at("alpha")));
  }

  if (term.contains("cocountable")) {
    const Json& c = term.at("cocountable");
    std::vector<Point> pts;
    for (const auto& q : c.at("points")) pts.push_back(pointFromJson(q));
    return cocountableTree(buildTree(c.at("base")), std::move(pts));
  }

  if (term.contains("pipeline")) {
    std::vector<PipelineComponent> comps;
    for (const auto& c : term.at("pipeline").at("components"))
      comps.push_back({buildTree(c.at("tree")), FilterCert::fromJson(c.at("cert"))});
    return theorem2Pipeline(std::move(comps));
  }

  if (term.contains("corrupt")) {
    const Json& c = term.at("corrupt");
    const std::string mode = c.at("mode").get<std::string>();
    CorruptMode m;
    if (mode == "overlap")
      m = CorruptMode::OverlapSons;
    else if (mode == "escape")
      m = CorruptMode::LeafEscape;
    else if (mode == "missPoint")
      m = CorruptMode::DropPoint;
    else
      throw ConfigError("unknown corruption mode: " + mode);
    return corruptTree(buildTree(c.at("base")), c.at("at").get<NodePath>(),
                       c.at("son").get<uint64_t>(), m);
  }

  throw ConfigError("unknown construction term: " + term.dump());
}

// the sample list for the grows-into suite: [{"point": ..., "nbhd": ...}]
inline std::vector<GrowsIntoSample> samplesFromJson(const Space& sp, const Json& j) {
  if (!j.is_array()) throw ConfigError("samples must be a JSON array");
  std::vector<GrowsIntoSample> out;
  for (const auto& s : j)
    out.push_back({pointFromJson(s.at("point")), setFromJson(sp, s.at("nbhd"))});
  return out;
}

// pipeline stages rebuilt from a pipeline term, for the stage-level checks
inline PipelineResult pipelinePartsFromTerm(const Json& term) {
  if (!term.is_object() || !term.contains("pipeline"))
    throw ConfigError("not a pipeline term: " + term.dump());
  std::vector<PipelineComponent> comps;
  for (const auto& c : term.at("pipeline").at("components"))
    comps.push_back({buildTree(c.at("tree")), FilterCert::fromJson(c.at("cert"))});
  return theorem2PipelineParts(std::move(comps));
}

}  // end of namespace pitree
