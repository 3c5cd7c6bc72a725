#pragma once

/****************************************************************************
 * The full pipeline from filter certificates to a product tree: shift the
 * certificates into mutually meeting reindexing maps, rescale every
 * component tree by its map, and take the product.
 ****************************************************************************/

#include <utility>
#include <vector>

#include "pitree/product.hpp"
#include "pitree/rescale.hpp"
#include "pitree/shift.hpp"

namespace pitree {

struct PipelineComponent {
  TreePtr tree;
  FilterCert cert;
};

// the intermediate stages, kept around so the meeting-images condition and
// per-component rises can be inspected after the fact
struct PipelineResult {
  ShiftResult shift;
  std::vector<TreePtr> rescaled;
  TreePtr product;
};

// each certificate acts as its own refining family: the shift recursion is
// run with delta = gamma = the given certificates
inline PipelineResult theorem2PipelineParts(std::vector<PipelineComponent> components) {
  if (components.size() < 2)
    throw LambdaTooSmall("the pipeline needs at least two components");
  std::vector<FilterCert> delta, gamma;
  for (const auto& c : components) {
    if (!c.tree) throw ConfigError("pipeline component without a tree");
    delta.push_back(c.cert);
    gamma.push_back(c.cert);
  }
  ShiftResult sr = shiftFilters(std::move(delta), std::move(gamma));

  std::vector<TreePtr> rescaled;
  rescaled.reserve(components.size());
  for (size_t n = 0; n < components.size(); ++n) {
    const AlphaFn a = sr.alpha()[n];
    AlphaMap m = AlphaMap::fromFn([a](int64_t x) { return a.at(x); }, a.describe());
    rescaled.push_back(rescaleTree(components[n].tree, std::move(m)));
  }
  TreePtr prod = productTree((uint32_t)components.size(), rescaled);
  return PipelineResult{std::move(sr), std::move(rescaled), std::move(prod)};
}

inline TreePtr theorem2Pipeline(std::vector<PipelineComponent> components) {
  return theorem2PipelineParts(std::move(components)).product;
}

}  // end of namespace pitree
