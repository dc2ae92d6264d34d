#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace geobound {

/// Arbitrary-precision rational. All certified quantities use this type.
using Rational = mpq_class;

/// Exact conversion: every finite double is a dyadic rational.
inline Rational from_double(double x) {
  Rational r(x);
  r.canonicalize();
  return r;
}

/// num/den in canonical form; mpq_class(num, den) alone does not reduce.
inline Rational ratio(const mpz_class& num, const mpz_class& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// Parses `p/q`, an integer, or a finite decimal such as `0.125` exactly.
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// `p/q` form (or plain integer when the denominator is 1).
std::string to_string(const Rational& r);

Rational pow(const Rational& base, std::size_t exponent);

/// Smallest-denominator rational in [lo, hi] (Stern-Brocot search).
/// Requires 0 <= lo <= hi.
Rational simplest_between(const Rational& lo, const Rational& hi);

std::size_t hash_value(const Rational& r);

}  // namespace geobound
