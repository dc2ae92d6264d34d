#include "geobound/rational.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace geobound {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw std::invalid_argument("malformed rational: " + std::string(text));
    }
    mpz_class d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    Rational r(mpz_class(std::string(num), 10), d);
    r.canonicalize();
    return r;
  }
  const auto dot = text.find('.');
  if (dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac)) {
      throw std::invalid_argument("malformed decimal: " + std::string(text));
    }
    std::string digits = std::string(whole) + std::string(frac);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(mpz_class(digits, 10), den);
    r.canonicalize();
    return r;
  }
  if (!all_digits(text)) {
    throw std::invalid_argument("malformed number: " + std::string(text));
  }
  return Rational(mpz_class(std::string(text), 10));
}

std::string to_string(const Rational& r) { return r.get_str(10); }

Rational pow(const Rational& base, std::size_t exponent) {
  Rational result(1);
  Rational b = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= b;
    exponent >>= 1U;
    if (exponent > 0) b *= b;
  }
  return result;
}

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (lo > hi || lo < 0) throw std::invalid_argument("simplest_between: bad interval");
  if (lo == 0) return Rational(0);
  // Stern-Brocot descent with run-length steps, so the walk is logarithmic
  // in the size of the answer.
  const auto largest_below = [](const Rational& q) {
    // largest integer k with k < q, for q > 0
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    c -= 1;
    return c < 1 ? mpz_class(1) : c;
  };
  mpz_class ln = 0, ld = 1;
  mpz_class rn = 1, rd = 0;
  for (;;) {
    const mpz_class mn = ln + rn, md = ld + rd;
    const Rational mid(mn, md);
    if (mid < lo) {
      // left += k * right while the mediant stays below lo
      const Rational a = Rational(rn) - lo * Rational(rd);
      const Rational b = lo * Rational(ld) - Rational(ln);
      const mpz_class k = largest_below(b / a);
      ln += k * rn;
      ld += k * rd;
    } else if (mid > hi) {
      const Rational a = Rational(ln) - hi * Rational(ld);
      const Rational b = hi * Rational(rd) - Rational(rn);
      const mpz_class k = largest_below(b / a);
      rn += k * ln;
      rd += k * ld;
    } else {
      Rational out(mn, md);
      out.canonicalize();
      return out;
    }
  }
}

std::size_t hash_value(const Rational& r) {
  std::size_t h = mpz_get_ui(r.get_num_mpz_t());
  h ^= std::hash<unsigned long>{}(mpz_get_ui(r.get_den_mpz_t())) + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U);
  h ^= static_cast<std::size_t>(mpz_sgn(r.get_num_mpz_t()) + 1);
  h ^= mpz_size(r.get_num_mpz_t()) * 31U + mpz_size(r.get_den_mpz_t());
  return h;
}

}  // namespace geobound
