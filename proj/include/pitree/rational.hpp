#pragma once

/****************************************************************************
 * Exact rational arithmetic for the Sorgenfrey line.  Values are
 * boost::rational over arbitrary precision integers; no floating point is
 * used anywhere in interval computations.
 ****************************************************************************/

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cctype>
#include <optional>
#include <string>

#include "pitree/common.hpp"

namespace pitree {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

inline Rat makeRat(long long num, long long den = 1) {
  return Rat(BigInt(num), BigInt(den));
}

// parses "a/b" or "a" with optional leading minus; throws ConfigError on junk
inline Rat parseRat(const std::string& s) {
  auto bad = [&] { throw ConfigError("not a rational: '" + s + "'"); };
  if (s.empty()) bad();
  size_t slash = s.find('/');
  auto parseInt = [&](const std::string& t) -> BigInt {
    if (t.empty() || (t.size() == 1 && (t[0] == '-' || t[0] == '+'))) bad();
    size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    for (; i < t.size(); ++i)
      if (!std::isdigit((unsigned char)t[i])) bad();
    return BigInt(t[0] == '+' ? t.substr(1) : t);
  };
  if (slash == std::string::npos) return Rat(parseInt(s), BigInt(1));
  BigInt num = parseInt(s.substr(0, slash));
  BigInt den = parseInt(s.substr(slash + 1));
  if (den == 0) bad();
  return Rat(num, den);
}

inline std::string ratToString(const Rat& r) {
  std::string s = r.numerator().str();
  if (r.denominator() != 1) s += "/" + r.denominator().str();
  return s;
}

inline BigInt floorRat(const Rat& r) {
  BigInt q = r.numerator() / r.denominator();
  if (r.numerator() < 0 && q * r.denominator() != r.numerator()) --q;
  return q;
}

// 2^{-k} as an exact rational
inline Rat pow2inv(uint64_t k) {
  BigInt d = 1;
  d <<= (unsigned)k;
  return Rat(BigInt(1), d);
}

/* ----- extended line endpoints: nullopt encodes the missing endpoint ----- */

// lower endpoint comparison where nullopt = -infinity
inline bool loLess(const std::optional<Rat>& a, const std::optional<Rat>& b) {
  if (!a) return (bool)b;
  if (!b) return false;
  return *a < *b;
}

// upper endpoint comparison where nullopt = +infinity
inline bool hiLess(const std::optional<Rat>& a, const std::optional<Rat>& b) {
  if (!b) return (bool)a;
  if (!a) return false;
  return *a < *b;
}

inline std::optional<Rat> loMax(const std::optional<Rat>& a, const std::optional<Rat>& b) {
  return loLess(a, b) ? b : a;
}

inline std::optional<Rat> hiMin(const std::optional<Rat>& a, const std::optional<Rat>& b) {
  return hiLess(a, b) ? a : b;
}

}  // end of namespace pitree
