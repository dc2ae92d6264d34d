#include "doctest.h"

#include <random>

#include "geobound/rational.hpp"

using namespace geobound;

TEST_CASE("rational literals") {
  CHECK(parse_rational("1/3") == Rational(1, 3));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational("7") == Rational(7));
  CHECK(to_string(ratio(2, 4)) == "1/2");
  CHECK_THROWS(parse_rational("1/0"));
  CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("from_double is exact") {
  CHECK(from_double(0.1) != Rational(1, 10));
  CHECK(to_double(from_double(0.1)) == 0.1);
}

TEST_CASE("simplest_between finds the smallest denominator") {
  CHECK(simplest_between(Rational(1, 3), Rational(1, 2)) == Rational(1, 2));
  CHECK(simplest_between(Rational(0), Rational(1, 5)) == Rational(0));
  CHECK(simplest_between(Rational(31, 100), Rational(34, 100)) == Rational(1, 3));
  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    const long a = rng() % 997 + 1, b = rng() % 997 + 1;
    const Rational lo = ratio(a, 1000), hi = lo + ratio(b, 100000);
    const Rational s = simplest_between(lo, hi);
    CHECK(s >= lo);
    CHECK(s <= hi);
    // brute force: no fraction with smaller denominator lies in range
    for (long q = 1; q < s.get_den().get_si(); ++q) {
      mpz_class p;
      mpz_cdiv_q(p.get_mpz_t(), mpz_class(lo.get_num() * q).get_mpz_t(), lo.get_den().get_mpz_t());
      CHECK(ratio(p, q) > hi);
    }
  }
}
