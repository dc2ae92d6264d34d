#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geobound/egd.hpp"
#include "geobound/errors.hpp"
#include "geobound/expr.hpp"
#include "geobound/lang.hpp"

namespace geobound {

struct ExprOps {
  using Value = ExprId;
  ExprPool* pool;

  ExprId zero() const { return ExprPool::kZero; }
  ExprId one() const { return ExprPool::kOne; }
  ExprId constant(const Rational& r) const { return pool->constant(r); }
  ExprId add(ExprId a, ExprId b) const { return pool->add(a, b); }
  ExprId mul(ExprId a, ExprId b) const { return pool->mul(a, b); }
  ExprId div(ExprId a, ExprId b) const { return pool->div(a, b); }
  ExprId nsub(ExprId a, ExprId b) const { return pool->nsub(a, b); }
  ExprId one_minus(ExprId a) const { return pool->one_minus(a); }
};

/// EGD whose entries are expressions. Decays are always a variable or a constant.
using SymEgd = BasicEgd<ExprId>;

enum class VarKind { BlockEntry, DecayRate, ContractionFactor };

struct SymVar {
  std::string name;
  VarKind kind;
  std::size_t loop_id = 0;
  std::size_t dim = 0;
};

/// lhs <= rhs
struct Constraint {
  ExprId lhs;
  ExprId rhs;
};

struct ConstraintSystem {
  std::shared_ptr<ExprPool> pool = std::make_shared<ExprPool>();
  std::vector<SymVar> vars;
  std::vector<Constraint> constraints;
  std::optional<ExprId> objective;
  /// Union-find parent per variable; merged variables share a value.
  std::vector<std::uint32_t> parent;
  std::size_t kind_count[3] = {0, 0, 0};

  std::uint32_t add_var(VarKind kind, std::size_t loop_id, std::size_t dim);
  std::uint32_t find(std::uint32_t v) const;
  ExprId var_expr(std::uint32_t v) const { return pool->var(v); }
  /// Decay rates and contraction factors live in [0,1).
  bool unit_domain(std::uint32_t v) const { return vars[v].kind != VarKind::BlockEntry; }
  /// Representative variables that still occur.
  std::vector<std::uint32_t> live_vars() const;
  std::string var_name(std::uint32_t v) const { return vars[v].name; }
};

struct Objective {
  enum class Kind { TotalMass, ExpectedValue, TailDecay };
  Kind kind = Kind::ExpectedValue;
  std::size_t var = 0;
};

struct GenOptions {
  std::size_t invariant_size = 1;
  std::size_t unroll = 0;
  Objective objective;
  bool use_strict_join = true;
  const Deadline* deadline = nullptr;
};

/// Values for the nonlinear unknowns, keyed by loop (and dimension for decays).
struct NonlinearFix {
  std::map<std::pair<std::size_t, std::size_t>, Rational> decay;
  std::map<std::size_t, Rational> contraction;
};

struct GeneratedSystem {
  ConstraintSystem system;
  SymEgd output;
};

SymEgd to_symbolic(ExprPool& pool, const Egd& g);
SymEgd sym_restrict(ExprPool& pool, const SymEgd& g, const Event& e);

/// Symbolic semantics of the program unrolled opts.unroll times. With `fix`
/// every loop reuses the given decay rates and contraction factors.
GeneratedSystem generate_system(const CoreProgram& p, const Egd& init, const GenOptions& opts,
                                const NonlinearFix* fix = nullptr);

/// Merges decay rates forced equal by cycles of atomic <= constraints.
ConstraintSystem unify_cyclic_decays(ConstraintSystem sys);

/// Regenerates at opts.unroll with the nonlinear unknowns fixed; every
/// constraint of the result is affine. Throws std::invalid_argument when the
/// fix misses a loop.
GeneratedSystem relinearize(const CoreProgram& p, const Egd& init, const GenOptions& opts, const NonlinearFix& fix);

/// Reads decay and contraction values off a full assignment (indexed by var).
NonlinearFix extract_fix(const ConstraintSystem& sys, std::span<const Rational> values);

/// Values of a batch of expressions under an exact assignment.
std::vector<Rational> evaluate_many(const ExprPool& pool, std::span<const ExprId> roots, std::span<const Rational> values);
Egd evaluate(const ExprPool& pool, const SymEgd& g, std::span<const Rational> values);

/// Deterministic text dump, one `lhs <= rhs` per line.
std::string dump(const ConstraintSystem& sys);

}  // namespace geobound
