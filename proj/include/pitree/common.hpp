#pragma once

/****************************************************************************
 * Shared primitives: node paths, error types, the Cantor tuple coding and
 * a tiny stderr logger gated by the PITREE_LOG environment variable.
 ****************************************************************************/

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitree {

// a node of an omega-branching skeleton is addressed by its finite word of
// son indices, read from the root
using NodePath = std::vector<uint64_t>;

inline bool isPrefixOf(const NodePath& a, const NodePath& b) {
  if (a.size() > b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline std::string pathToString(const NodePath& p) {
  std::ostringstream os;
  os << "<";
  for (size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
  os << ">";
  return os.str();
}

/* ----- error types ----- */

struct PitreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PITREE_ERROR(NAME)                       \
  struct NAME : PitreeError {                    \
    using PitreeError::PitreeError;              \
  };

PITREE_ERROR(PointOutsideRoot)
PITREE_ERROR(PartitionViolation)
PITREE_ERROR(SpaceMismatch)
PITREE_ERROR(ArityZero)
PITREE_ERROR(NotOmegaBranching)
PITREE_ERROR(ComponentNotVerified)
PITREE_ERROR(LambdaTooSmall)
PITREE_ERROR(FIPViolation)
PITREE_ERROR(NotRefining)
PITREE_ERROR(AlphaNotIncreasing)
PITREE_ERROR(DuplicatePoint)
PITREE_ERROR(InconsistentFamily)
PITREE_ERROR(ConfigError)
PITREE_ERROR(NumericOverflow)

#undef PITREE_ERROR

/* ----- three valued logic for symbolic set queries ----- */

enum class Triv : uint8_t { No = 0, Yes = 1, Unknown = 2 };

inline Triv trivAnd(Triv a, Triv b) {
  if (a == Triv::No || b == Triv::No) return Triv::No;
  if (a == Triv::Yes && b == Triv::Yes) return Triv::Yes;
  return Triv::Unknown;
}

inline Triv trivNot(Triv a) {
  if (a == Triv::Unknown) return Triv::Unknown;
  return a == Triv::Yes ? Triv::No : Triv::Yes;
}

inline const char* trivName(Triv a) {
  switch (a) {
    case Triv::No: return "no";
    case Triv::Yes: return "yes";
    default: return "unknown";
  }
}

/* ----- Cantor coding of finite tuples ----- */

// pair(x,y) = (x+y)(x+y+1)/2 + y, the usual diagonal bijection omega^2 -> omega
inline uint64_t cantorPair(uint64_t x, uint64_t y) {
  unsigned __int128 s = (unsigned __int128)x + y;
  unsigned __int128 v = s * (s + 1) / 2 + y;
  if (v > UINT64_MAX) throw NumericOverflow("cantorPair overflow");
  return (uint64_t)v;
}

inline std::pair<uint64_t, uint64_t> cantorUnpair(uint64_t z) {
  // s = floor((sqrt(8z+1)-1)/2), guarded against double rounding
  uint64_t s = (uint64_t)((std::sqrt(8.0 * (double)z + 1.0) - 1.0) / 2.0);
  while ((unsigned __int128)(s + 1) * (s + 2) / 2 <= z) ++s;
  while ((unsigned __int128)s * (s + 1) / 2 > z) --s;
  uint64_t y = z - s * (s + 1) / 2;
  return {s - y, y};
}

// right fold: a tuple of length k >= 1 is coded as pair(w0, code of rest),
// and a tuple of length 1 as its sole entry
inline uint64_t tupleEnc(const std::vector<uint64_t>& w) {
  if (w.empty()) throw ArityZero("tupleEnc on empty tuple");
  uint64_t acc = w.back();
  for (size_t i = w.size() - 1; i-- > 0;) acc = cantorPair(w[i], acc);
  return acc;
}

inline std::vector<uint64_t> tupleDec(uint64_t z, uint32_t k) {
  if (k == 0) throw ArityZero("tupleDec with k = 0");
  std::vector<uint64_t> w;
  w.reserve(k);
  while (w.size() + 1 < k) {
    auto [x, rest] = cantorUnpair(z);
    w.push_back(x);
    z = rest;
  }
  w.push_back(z);
  return w;
}

/* ----- logging ----- */

enum class LogLevel : int { Off = 0, Info = 1, Debug = 2 };

inline LogLevel logLevel() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("PITREE_LOG");
    if (!e) return LogLevel::Off;
    std::string s(e);
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    return LogLevel::Off;
  }();
  return lvl;
}

inline void logInfo(const std::string& msg) {
  if ((int)logLevel() >= (int)LogLevel::Info) std::cerr << "[pitree] " << msg << "\n";
}

inline void logDebug(const std::string& msg) {
  if ((int)logLevel() >= (int)LogLevel::Debug) std::cerr << "[pitree:dbg] " << msg << "\n";
}

}  // end of namespace pitree
