#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geobound/errors.hpp"
#include "geobound/symgeo.hpp"

namespace geobound {

enum class SolveStatus { Feasible, NoSolutionFound, InfeasibleByDomain, Timeout };

std::string to_string(SolveStatus s);

/// Values indexed by variable, as floats for the search and exact rationals
/// for verification.
struct Assignment {
  std::vector<double> approx;
  std::vector<Rational> exact;

  static Assignment from_doubles(std::vector<double> values);
  static Assignment from_rationals(std::vector<Rational> values);
};

struct SolveReport {
  SolveStatus status = SolveStatus::NoSolutionFound;
  std::optional<Assignment> assignment;
  /// Exact objective value at the assignment (0 without an objective).
  std::optional<Rational> objective;
  std::size_t iterations = 0;
  double seconds = 0;
};

double eval_float(const ExprPool& pool, ExprId e, std::span<const double> values);
Rational eval_rational(const ExprPool& pool, ExprId e, std::span<const Rational> values);

struct Verification {
  bool ok = true;
  std::vector<std::size_t> violated;        // constraint indices
  std::vector<std::uint32_t> out_of_domain; // variable indices
};

/// Exact check of every constraint and variable domain. Values are indexed
/// by variable; merged variables read their representative's value.
Verification verify_exact(const ConstraintSystem& sys, std::span<const Rational> values);

struct PenaltyOptions {
  std::size_t max_iterations = 5000;
  double step = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  /// Relative tightening applied during the search.
  double margin = 1e-6;
  /// Extra searches with a tenfold larger margin after a failed one.
  std::size_t retries = 2;
  std::uint64_t seed = 0;
  const Deadline* deadline = nullptr;
};

SolveReport penalty_solve(const ConstraintSystem& sys, const PenaltyOptions& opts = {},
                          const std::optional<std::vector<double>>& seed = std::nullopt);

/// Minimizes the objective over the block entries that `a0` leaves free
/// (entries of a0.exact that are nullopt), keeping every other variable at
/// its a0 value. Constraints and objective must then be affine.
SolveReport optimize_linear(const ConstraintSystem& sys, const std::vector<std::optional<Rational>>& a0,
                            const Deadline* deadline = nullptr);

/// Exact rational simplex: minimize c.x subject to A x <= b, x >= 0.
struct LinearProgram {
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<Rational> c;
};
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded } status;
  std::vector<Rational> x;
  Rational value;
};
LpResult simplex(const LinearProgram& lp, const Deadline* deadline = nullptr);

/// SMT-LIB 2 script (QF_NRA) asserting the constraints and domains.
std::string to_smtlib(const ConstraintSystem& sys);

/// Backend seam: anything that can search a constraint system.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual SolveReport solve(const ConstraintSystem& sys) = 0;
};

class PenaltySolver : public Solver {
 public:
  explicit PenaltySolver(PenaltyOptions opts = {}) : opts_(opts) {}
  SolveReport solve(const ConstraintSystem& sys) override { return penalty_solve(sys, opts_); }

 private:
  PenaltyOptions opts_;
};

}  // namespace geobound
