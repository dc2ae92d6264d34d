#pragma once

#include <string>

#include "geobound/egd_ops.hpp"

namespace geobound {

struct RationalOps {
  using Value = Rational;
  Rational zero() const { return 0; }
  Rational one() const { return 1; }
  Rational constant(const Rational& r) const { return r; }
  Rational add(const Rational& a, const Rational& b) const { return a + b; }
  Rational mul(const Rational& a, const Rational& b) const { return a * b; }
  Rational div(const Rational& a, const Rational& b) const { return a / b; }
  Rational nsub(const Rational& a, const Rational& b) const { return a - b; }
  Rational one_minus(const Rational& a) const { return 1 - a; }
};

/// Eventually geometric distribution with exact rational block and decays.
using Egd = BasicEgd<Rational>;

/// Validates shapes, nonnegativity and decays in [0,1).
Egd make_egd(Tensor<Rational> block, std::vector<Rational> decay);
Egd egd_dirac(const std::vector<std::size_t>& point);

Rational mass_at(const Egd& g, std::span<const std::size_t> idx);
Egd expand(const Egd& g, const Shape& shape);
bool egd_le(const Egd& a, const Egd& b);
Egd marginalize(const Egd& g, std::size_t k);
Egd marginal_of(const Egd& g, std::size_t var);
Rational moment(const Egd& g1, std::size_t k);
Rational total_mass(const Egd& g);
Egd join_strict(const Egd& a, const Egd& b);
Egd restrict(const Egd& g, const Event& e);
/// Geometric bound semantics of a loop-free statement (strict joins).
/// Throws std::invalid_argument on loops.
Egd transfer_loop_free(const StmtPtr& stmt, const Egd& in);

std::string to_string(const Egd& g);

}  // namespace geobound
