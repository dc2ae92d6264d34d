#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geobound/rational.hpp"

namespace geobound {

/// [lo, hi] with hi = nullopt meaning +infinity.
struct Interval {
  Rational lo = 0;
  std::optional<Rational> hi = Rational(0);

  static Interval exact(const Rational& v) { return {v, v}; }
  static Interval unbounded_above(const Rational& lo) { return {lo, std::nullopt}; }
  bool contains(const Rational& v) const { return lo <= v && (!hi || v <= *hi); }
  /// Tightest interval contained in both.
  Interval intersect(const Interval& other) const;
  bool operator==(const Interval&) const = default;
};

/// Integer interval [lo, hi] over the naturals; hi = nullopt means unbounded.
struct Range {
  std::uint64_t lo = 0;
  std::optional<std::uint64_t> hi = 0;

  bool contains(std::uint64_t v) const { return v >= lo && (!hi || v <= *hi); }
  bool bounded() const { return hi.has_value(); }
  bool operator==(const Range&) const = default;
};

/// Product of ranges, one per variable. The empty set is represented
/// separately (std::optional<RangeBox> without value) by callers.
using RangeBox = std::vector<Range>;

inline Interval Interval::intersect(const Interval& other) const {
  Interval out;
  out.lo = lo > other.lo ? lo : other.lo;
  if (!hi) out.hi = other.hi;
  else if (!other.hi) out.hi = hi;
  else out.hi = *hi < *other.hi ? *hi : *other.hi;
  return out;
}

}  // namespace geobound
