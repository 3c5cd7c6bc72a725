#pragma once

/****************************************************************************
 * Space signatures and finitely describable points.
 *
 * Baire points are eventually constant integer sequences, Sorgenfrey points
 * are exact rationals, product points list finitely many coordinates and
 * repeat a template beyond them.  Every membership question about these
 * points is decidable from the description.
 ****************************************************************************/

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "pitree/common.hpp"
#include "pitree/rational.hpp"

namespace pitree {

using Json = nlohmann::json;

/* ----- spaces ----- */

enum class SpaceKind : uint8_t { Baire, Sorg, Product };

struct Space {
  SpaceKind kind = SpaceKind::Baire;
  // product data: factors, cycled when lambda is omega (lambda == nullopt)
  std::optional<uint32_t> lambda;
  std::vector<Space> factors;

  static Space baire() { return Space{SpaceKind::Baire, std::nullopt, {}}; }
  static Space sorg() { return Space{SpaceKind::Sorg, std::nullopt, {}}; }
  static Space product(std::optional<uint32_t> lam, std::vector<Space> fs) {
    if (lam && *lam != fs.size()) throw SpaceMismatch("product arity mismatch");
    if (fs.empty()) throw SpaceMismatch("product needs at least one factor");
    return Space{SpaceKind::Product, lam, std::move(fs)};
  }

  bool isOmegaProduct() const { return kind == SpaceKind::Product && !lambda; }

  const Space& factorAt(size_t i) const {
    if (kind != SpaceKind::Product) throw SpaceMismatch("factorAt on non-product");
    if (lambda) {
      if (i >= *lambda) throw SpaceMismatch("factor index out of range");
      return factors[i];
    }
    return factors[i % factors.size()];
  }

  bool operator==(const Space& o) const {
    return kind == o.kind && lambda == o.lambda && factors == o.factors;
  }
  bool operator!=(const Space& o) const { return !(*this == o); }

  Json toJson() const {
    switch (kind) {
      case SpaceKind::Baire: return Json{{"space", "baire"}};
      case SpaceKind::Sorg: return Json{{"space", "sorg"}};
      default: {
        Json fs = Json::array();
        for (const auto& f : factors) fs.push_back(f.toJson());
        Json j{{"space", "product"}, {"factors", fs}};
        j["lambda"] = lambda ? Json(*lambda) : Json("omega");
        return j;
      }
    }
  }
};

/* ----- points ----- */

struct Point;

// eventually constant element of omega^omega
struct BairePoint {
  std::vector<uint64_t> prefix;
  uint64_t tail = 0;

  uint64_t at(size_t i) const { return i < prefix.size() ? prefix[i] : tail; }
  bool operator==(const BairePoint& o) const;
};

struct SorgPoint {
  Rat value;
  bool operator==(const SorgPoint& o) const { return value == o.value; }
};

// finitely many explicit coordinates, a template beyond them
struct ProductPoint {
  std::vector<Point> coords;
  std::shared_ptr<const Point> tailTemplate;  // required for omega products

  const Point& at(size_t i) const;
  bool operator==(const ProductPoint& o) const;
};

struct Point {
  std::variant<BairePoint, SorgPoint, ProductPoint> v;

  Point() : v(BairePoint{}) {}
  Point(BairePoint b) : v(std::move(b)) {}
  Point(SorgPoint s) : v(std::move(s)) {}
  Point(ProductPoint p) : v(std::move(p)) {}

  const BairePoint& baire() const { return std::get<BairePoint>(v); }
  const SorgPoint& sorg() const { return std::get<SorgPoint>(v); }
  const ProductPoint& prod() const { return std::get<ProductPoint>(v); }

  bool operator==(const Point& o) const { return v == o.v; }
  bool operator!=(const Point& o) const { return !(*this == o); }
};

inline bool BairePoint::operator==(const BairePoint& o) const {
  // compare as functions, not descriptions
  size_t n = std::max(prefix.size(), o.prefix.size());
  for (size_t i = 0; i < n; ++i)
    if (at(i) != o.at(i)) return false;
  return tail == o.tail;
}

inline const Point& ProductPoint::at(size_t i) const {
  if (i < coords.size()) return coords[i];
  if (!tailTemplate) throw SpaceMismatch("product point lacks a tail template");
  return *tailTemplate;
}

inline bool ProductPoint::operator==(const ProductPoint& o) const {
  size_t n = std::max(coords.size(), o.coords.size());
  for (size_t i = 0; i < n; ++i)
    if (!(at(i) == o.at(i))) return false;
  if (coords.size() == o.coords.size() && !tailTemplate && !o.tailTemplate) return true;
  if (!tailTemplate || !o.tailTemplate) return !tailTemplate && !o.tailTemplate;
  return *tailTemplate == *o.tailTemplate;
}

// structural check that a point describes an element of the space
inline bool pointInSpace(const Point& p, const Space& sp) {
  switch (sp.kind) {
    case SpaceKind::Baire: return std::holds_alternative<BairePoint>(p.v);
    case SpaceKind::Sorg: return std::holds_alternative<SorgPoint>(p.v);
    default: {
      if (!std::holds_alternative<ProductPoint>(p.v)) return false;
      const auto& pp = p.prod();
      if (sp.lambda) {
        if (pp.coords.size() > *sp.lambda) return false;
        if (pp.coords.size() < *sp.lambda && !pp.tailTemplate) return false;
      } else if (!pp.tailTemplate) {
        return false;
      }
      for (size_t i = 0; i < pp.coords.size(); ++i)
        if (!pointInSpace(pp.coords[i], sp.factorAt(i))) return false;
      // the template must fit every factor it stands for; one cycle suffices
      if (pp.tailTemplate) {
        size_t upto = sp.lambda ? (size_t)*sp.lambda
                                : pp.coords.size() + sp.factors.size();
        for (size_t i = pp.coords.size(); i < upto; ++i)
          if (!pointInSpace(*pp.tailTemplate, sp.factorAt(i))) return false;
      }
      return true;
    }
  }
}

/* ----- json ----- */

inline Json pointToJson(const Point& p) {
  if (std::holds_alternative<BairePoint>(p.v)) {
    const auto& b = p.baire();
    return Json{{"baire", {{"prefix", b.prefix}, {"tail", b.tail}}}};
  }
  if (std::holds_alternative<SorgPoint>(p.v))
    return Json{{"sorg", ratToString(p.sorg().value)}};
  const auto& pp = p.prod();
  Json cs = Json::array();
  for (const auto& c : pp.coords) cs.push_back(pointToJson(c));
  Json j{{"prod", {{"explicit", cs}}}};
  if (pp.tailTemplate) j["prod"]["tail"] = pointToJson(*pp.tailTemplate);
  return j;
}

inline Point pointFromJson(const Json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("malformed point: " + j.dump());
  if (j.contains("baire")) {
    const auto& b = j.at("baire");
    BairePoint bp;
    bp.prefix = b.at("prefix").get<std::vector<uint64_t>>();
    bp.tail = b.at("tail").get<uint64_t>();
    return Point(std::move(bp));
  }
  if (j.contains("sorg")) {
    std::string s = j.at("sorg").is_string() ? j.at("sorg").get<std::string>()
                                             : j.at("sorg").dump();
    return Point(SorgPoint{parseRat(s)});
  }
  if (j.contains("prod")) {
    const auto& pj = j.at("prod");
    ProductPoint pp;
    if (pj.is_array()) {
      for (const auto& c : pj) pp.coords.push_back(pointFromJson(c));
    } else {
      for (const auto& c : pj.at("explicit")) pp.coords.push_back(pointFromJson(c));
      if (pj.contains("tail"))
        pp.tailTemplate = std::make_shared<Point>(pointFromJson(pj.at("tail")));
    }
    return Point(std::move(pp));
  }
  throw ConfigError("unknown point kind: " + j.dump());
}

}  // end of namespace pitree
