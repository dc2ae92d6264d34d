#include "geobound/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace geobound {
namespace {

constexpr double kUnitCap = 1.0 - 1e-9;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// exp(z) continued linearly past z = 50 so violated constraints stay finite.
std::pair<double, double> sharp_exp(double z) {
  constexpr double cap = 50.0;
  if (z <= cap) {
    const double e = std::exp(z);
    return {e, e};
  }
  const double e = std::exp(cap);
  return {e * (1 + (z - cap)), e};
}

bool constant_false(const ExprPool& pool, const Constraint& c) {
  return pool.is_const(c.lhs) && pool.is_const(c.rhs) && pool.const_value(c.lhs) > pool.const_value(c.rhs);
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::NoSolutionFound: return "no_solution_found";
    case SolveStatus::InfeasibleByDomain: return "infeasible_by_domain";
    case SolveStatus::Timeout: return "timeout";
  }
  return "?";
}

Assignment Assignment::from_doubles(std::vector<double> values) {
  Assignment a;
  a.exact.reserve(values.size());
  for (double v : values) a.exact.push_back(from_double(v));
  a.approx = std::move(values);
  return a;
}

Assignment Assignment::from_rationals(std::vector<Rational> values) {
  Assignment a;
  a.approx.reserve(values.size());
  for (const auto& v : values) a.approx.push_back(to_double(v));
  a.exact = std::move(values);
  return a;
}

double eval_float(const ExprPool& pool, ExprId e, std::span<const double> values) {
  DagEvaluator ev(pool, {e});
  ev.forward(values);
  return ev.value(0);
}

Rational eval_rational(const ExprPool& pool, ExprId e, std::span<const Rational> values) {
  return eval_exact(pool, e, values);
}

Verification verify_exact(const ConstraintSystem& sys, std::span<const Rational> values) {
  Verification out;
  std::vector<Rational> resolved(sys.vars.size());
  for (std::uint32_t v = 0; v < sys.vars.size(); ++v) resolved[v] = values[sys.find(v)];
  for (auto v : sys.live_vars()) {
    const Rational& x = resolved[v];
    if (x < 0 || (sys.unit_domain(v) && x >= 1)) out.out_of_domain.push_back(v);
  }
  if (!out.out_of_domain.empty()) {
    out.ok = false;
    return out;
  }
  std::vector<ExprId> roots;
  for (const auto& c : sys.constraints) {
    roots.push_back(c.lhs);
    roots.push_back(c.rhs);
  }
  const auto vals = evaluate_many(*sys.pool, roots, resolved);
  for (std::size_t i = 0; i < sys.constraints.size(); ++i) {
    if (vals[2 * i] > vals[2 * i + 1]) out.violated.push_back(i);
  }
  out.ok = out.violated.empty();
  return out;
}

SolveReport penalty_solve(const ConstraintSystem& sys, const PenaltyOptions& opts,
                          const std::optional<std::vector<double>>& seed) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  const ExprPool& pool = *sys.pool;
  for (const auto& c : sys.constraints) {
    if (constant_false(pool, c)) {
      report.status = SolveStatus::InfeasibleByDomain;
      report.seconds = seconds_since(start);
      return report;
    }
  }

  const std::size_t n = sys.vars.size();
  const auto live = sys.live_vars();
  std::vector<ExprId> roots;
  const ExprId objective = sys.objective.value_or(ExprPool::kZero);
  roots.push_back(objective);
  for (const auto& c : sys.constraints) {
    roots.push_back(c.lhs);
    roots.push_back(c.rhs);
  }
  DagEvaluator ev(pool, roots);
  const std::size_t m = sys.constraints.size();

  std::vector<double> x0(n, 1.0);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (sys.unit_domain(v)) x0[v] = 0.999;
  }
  if (seed) {
    for (std::size_t v = 0; v < std::min(n, seed->size()); ++v) x0[v] = (*seed)[v];
  }
  const auto project = [&](std::vector<double>& x) {
    for (auto v : live) x[v] = std::clamp(x[v], 0.0, sys.unit_domain(v) ? kUnitCap : HUGE_VAL);
  };
  project(x0);

  ev.forward(x0);
  std::vector<double> scale(m);
  for (std::size_t i = 0; i < m; ++i) scale[i] = std::max(1.0, std::abs(ev.value(2 + 2 * i)));

  std::optional<Assignment> best;
  std::optional<Rational> best_objective;
  const auto offer = [&](Assignment cand, const Rational& obj) {
    if (best_objective && !(obj < *best_objective)) return;
    best_objective = obj;
    best = std::move(cand);
  };
  // Accepts x itself when it verifies; with `polish`, also fixes the
  // nonlinear unknowns near x and solves exactly for the block entries.
  const auto consider = [&](const std::vector<double>& x, bool polish) {
    ev.forward(x);
    double worst = -HUGE_VAL;
    for (std::size_t i = 0; i < m; ++i) {
      worst = std::max(worst, (ev.value(1 + 2 * i) - ev.value(2 + 2 * i)) / scale[i]);
    }
    if (worst <= 0 && (!best || ev.value(0) < to_double(*best_objective))) {
      Assignment cand = Assignment::from_doubles(x);
      if (verify_exact(sys, cand.exact).ok) offer(cand, eval_exact(pool, objective, cand.exact));
    }
    if (!polish || worst > 1e-2) return;
    std::vector<std::optional<Rational>> a0(n);
    bool any_unit = false;
    for (auto v : live) {
      if (!sys.unit_domain(v)) continue;
      any_unit = true;
      const double lo = std::max(0.0, x[v] - 1e-10 * std::max(1.0, x[v]));
      a0[v] = simplest_between(from_double(lo), from_double(x[v]));
    }
    if (!any_unit) return;
    try {
      SolveReport lin = optimize_linear(sys, a0, opts.deadline);
      if (lin.status == SolveStatus::Feasible) offer(std::move(*lin.assignment), *lin.objective);
    } catch (const std::invalid_argument&) {
    } catch (const Timeout&) {
    }
  };

  consider(x0, false);
  std::mt19937_64 rng(opts.seed);
  std::vector<double> grad(n), tmp(n), mom1(n), mom2(n);
  std::size_t total_iterations = 0;
  bool timed_out = false;
  double margin = opts.margin;

  for (std::size_t attempt = 0; attempt <= opts.retries && !live.empty() && !timed_out; ++attempt) {
    if (attempt > 0 && best) break;
    std::vector<double> x = x0;
    if (attempt > 0) {
      std::uniform_real_distribution<double> jitter(-0.05, 0.05);
      for (auto v : live) x[v] += jitter(rng);
      project(x);
    }
    std::fill(mom1.begin(), mom1.end(), 0.0);
    std::fill(mom2.begin(), mom2.end(), 0.0);
    for (std::size_t t = 1; t <= opts.max_iterations; ++t) {
      if (opts.deadline && opts.deadline->expired()) {
        timed_out = true;
        break;
      }
      ++total_iterations;
      const double lambda = static_cast<double>(t);
      ev.forward(x);
      std::fill(grad.begin(), grad.end(), 0.0);
      // The objective is positive; its logarithm has the same minimizer and
      // a gradient that does not swamp the moment estimates near the domain edge.
      ev.backward(0, 1.0 / std::max(ev.value(0), 1e-300), grad);
      for (std::size_t i = 0; i < m; ++i) {
        for (auto v : live) tmp[v] = 0.0;
        ev.backward(1 + 2 * i, 1.0, tmp);
        ev.backward(2 + 2 * i, -1.0, tmp);
        double norm = 0;
        for (auto v : live) norm += tmp[v] * tmp[v];
        norm = std::sqrt(norm);
        if (norm < 1e-12) norm = 1.0;
        const double f = ev.value(1 + 2 * i) - ev.value(2 + 2 * i) + margin * scale[i];
        const double slope = sharp_exp(lambda * f / norm).second * lambda / norm;
        for (auto v : live) grad[v] += slope * tmp[v];
      }
      const double step = opts.step / (1.0 + static_cast<double>(t) / 500.0);
      const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(t));
      for (auto v : live) {
        if (!std::isfinite(grad[v])) grad[v] = grad[v] > 0 ? 1e300 : -1e300;
        mom1[v] = opts.beta1 * mom1[v] + (1 - opts.beta1) * grad[v];
        mom2[v] = opts.beta2 * mom2[v] + (1 - opts.beta2) * grad[v] * grad[v];
        x[v] -= step * (mom1[v] / c1) / (std::sqrt(mom2[v] / c2) + 1e-12);
      }
      project(x);
      if (t == opts.max_iterations) consider(x, true);
      else if (t % 10 == 0) consider(x, t % 100 == 0);
    }
    margin *= 10;
  }

  report.iterations = total_iterations;
  if (best) {
    report.status = SolveStatus::Feasible;
    report.assignment = std::move(best);
    report.objective = best_objective;
  } else {
    report.status = timed_out ? SolveStatus::Timeout : SolveStatus::NoSolutionFound;
  }
  report.seconds = seconds_since(start);
  return report;
}

LpResult simplex(const LinearProgram& lp, const Deadline* deadline) {
  const std::size_t m = lp.b.size();
  const std::size_t n = lp.c.size();
  // Columns: originals, slacks, artificials, rhs.
  std::vector<std::size_t> artificial_rows;
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.b[i] < 0) artificial_rows.push_back(i);
  }
  const std::size_t k = artificial_rows.size();
  const std::size_t cols = n + m + k;
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(cols + 1));
  std::vector<std::size_t> basis(m);
  std::size_t next_art = n + m;
  for (std::size_t i = 0; i < m; ++i) {
    const int sign = lp.b[i] < 0 ? -1 : 1;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * lp.a[i][j];
    t[i][n + i] = sign;
    t[i][cols] = sign * lp.b[i];
    if (sign < 0) {
      t[i][next_art] = 1;
      basis[i] = next_art++;
    } else {
      basis[i] = n + i;
    }
  }

  std::vector<char> allowed(cols, 1);
  std::vector<Rational> z(cols + 1);
  const auto load_cost = [&](const std::vector<Rational>& cost) {
    for (std::size_t j = 0; j <= cols; ++j) z[j] = j < cols ? cost[j] : Rational(0);
    for (std::size_t i = 0; i < m; ++i) {
      const Rational cb = cost[basis[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= cols; ++j) z[j] -= cb * t[i][j];
    }
  };
  const auto pivot = [&](std::size_t r, std::size_t col) {
    const Rational p = t[r][col];
    for (auto& v : t[r]) v /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || t[i][col] == 0) continue;
      const Rational f = t[i][col];
      for (std::size_t j = 0; j <= cols; ++j) {
        if (t[r][j] != 0) t[i][j] -= f * t[r][j];
      }
    }
    if (z[col] != 0) {
      const Rational f = z[col];
      for (std::size_t j = 0; j <= cols; ++j) {
        if (t[r][j] != 0) z[j] -= f * t[r][j];
      }
    }
    basis[r] = col;
  };
  // Bland's rule; returns false when unbounded.
  const auto optimize = [&]() {
    for (;;) {
      if (deadline) deadline->check();
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (allowed[j] && z[j] < 0) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;
      std::size_t leave = m;
      Rational best_ratio;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= 0) continue;
        const Rational ratio = t[i][cols] / t[i][enter];
        if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  if (k > 0) {
    std::vector<Rational> cost(cols, 0);
    for (std::size_t j = n + m; j < cols; ++j) cost[j] = 1;
    load_cost(cost);
    optimize();
    if (-z[cols] != 0) return {LpResult::Status::Infeasible, {}, 0};
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n + m) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (t[i][j] != 0) {
          pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = n + m; j < cols; ++j) allowed[j] = 0;
  }
  std::vector<Rational> cost(cols, 0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.c[j];
  load_cost(cost);
  if (!optimize()) return {LpResult::Status::Unbounded, {}, 0};
  LpResult out{LpResult::Status::Optimal, std::vector<Rational>(n, 0), 0};
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = t[i][cols];
  }
  for (std::size_t j = 0; j < n; ++j) out.value += lp.c[j] * out.x[j];
  return out;
}

SolveReport optimize_linear(const ConstraintSystem& sys, const std::vector<std::optional<Rational>>& a0,
                            const Deadline* deadline) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  ExprPool& pool = *sys.pool;
  const auto live = sys.live_vars();
  std::vector<std::uint32_t> free;
  std::vector<std::size_t> column(sys.vars.size(), static_cast<std::size_t>(-1));
  for (auto v : live) {
    if (v >= a0.size() || !a0[v]) {
      if (sys.vars[v].kind != VarKind::BlockEntry) throw std::invalid_argument("optimize_linear: nonlinear unknown left free");
      column[v] = free.size();
      free.push_back(v);
    }
  }
  std::unordered_map<ExprId, ExprId> memo;
  const auto fixed = [&](std::uint32_t v) -> std::optional<ExprId> {
    const auto r = sys.find(v);
    if (column[r] != static_cast<std::size_t>(-1)) return r == v ? std::nullopt : std::optional<ExprId>(pool.var(r));
    return pool.constant(*a0[r]);
  };
  const auto form_of = [&](ExprId e) {
    auto f = linear_form(pool, pool.substitute(e, fixed, memo));
    if (!f) throw std::invalid_argument("optimize_linear: system is not linear in the free variables");
    return *f;
  };

  LinearProgram lp;
  lp.c.assign(free.size(), 0);
  Rational objective_offset = 0;
  if (sys.objective) {
    const LinearForm f = form_of(*sys.objective);
    objective_offset = f.constant;
    for (const auto& [v, coef] : f.coeffs) lp.c[column[v]] = coef;
  }
  for (const auto& c : sys.constraints) {
    const LinearForm l = form_of(c.lhs);
    const LinearForm r = form_of(c.rhs);
    std::vector<Rational> row(free.size(), 0);
    bool any = false;
    for (const auto& [v, coef] : l.coeffs) {
      row[column[v]] += coef;
      any = true;
    }
    for (const auto& [v, coef] : r.coeffs) {
      row[column[v]] -= coef;
      any = true;
    }
    const Rational rhs = r.constant - l.constant;
    if (!any) {
      if (rhs < 0) {
        report.status = SolveStatus::InfeasibleByDomain;
        report.seconds = seconds_since(start);
        return report;
      }
      continue;
    }
    lp.a.push_back(std::move(row));
    lp.b.push_back(rhs);
  }

  LpResult res;
  try {
    res = simplex(lp, deadline);
  } catch (const Timeout&) {
    report.status = SolveStatus::Timeout;
    report.seconds = seconds_since(start);
    return report;
  }
  if (res.status != LpResult::Status::Optimal) {
    report.status = SolveStatus::NoSolutionFound;
    report.seconds = seconds_since(start);
    return report;
  }
  std::vector<Rational> values(sys.vars.size(), 0);
  for (std::uint32_t v = 0; v < sys.vars.size(); ++v) {
    if (column[v] != static_cast<std::size_t>(-1)) values[v] = res.x[column[v]];
    else if (v < a0.size() && a0[v]) values[v] = *a0[v];
  }
  if (!verify_exact(sys, values).ok) {
    report.status = SolveStatus::NoSolutionFound;
    report.seconds = seconds_since(start);
    return report;
  }
  report.status = SolveStatus::Feasible;
  report.objective = sys.objective ? eval_exact(pool, *sys.objective, values) : Rational(0);
  report.assignment = Assignment::from_rationals(std::move(values));
  report.iterations = 1;
  report.seconds = seconds_since(start);
  return report;
}

std::string to_smtlib(const ConstraintSystem& sys) {
  const ExprPool& pool = *sys.pool;
  std::ostringstream os;
  os << "(set-logic QF_NRA)\n";
  for (auto v : sys.live_vars()) os << "(declare-fun " << sys.vars[v].name << " () Real)\n";
  std::set<ExprId> needed;
  std::vector<ExprId> stack;
  for (const auto& c : sys.constraints) {
    stack.push_back(c.lhs);
    stack.push_back(c.rhs);
  }
  while (!stack.empty()) {
    const ExprId id = stack.back();
    stack.pop_back();
    const ExprNode& n = pool.node(id);
    if (n.op == ExprOp::Const || n.op == ExprOp::Var || !needed.insert(id).second) continue;
    stack.push_back(n.a);
    stack.push_back(n.b);
  }
  const auto atom = [&](ExprId id) -> std::string {
    const ExprNode& n = pool.node(id);
    if (n.op == ExprOp::Var) return sys.vars[sys.find(n.a)].name;
    if (n.op == ExprOp::Const) {
      const Rational& r = pool.const_value(id);
      if (r.get_den() == 1) return r.get_num().get_str() + ".0";
      return "(/ " + r.get_num().get_str() + ".0 " + r.get_den().get_str() + ".0)";
    }
    return "e" + std::to_string(id);
  };
  for (ExprId id : needed) {
    const ExprNode& n = pool.node(id);
    const char* op = n.op == ExprOp::Add ? "+" : n.op == ExprOp::Mul ? "*" : n.op == ExprOp::Div ? "/" : "-";
    os << "(define-fun e" << id << " () Real (" << op << ' ' << atom(n.a) << ' ' << atom(n.b) << "))\n";
  }
  for (auto v : sys.live_vars()) {
    os << "(assert (>= " << sys.vars[v].name << " 0.0))\n";
    if (sys.unit_domain(v)) os << "(assert (< " << sys.vars[v].name << " 1.0))\n";
  }
  for (const auto& c : sys.constraints) os << "(assert (<= " << atom(c.lhs) << ' ' << atom(c.rhs) << "))\n";
  os << "(check-sat)\n(get-model)\n";
  return os.str();
}

}  // namespace geobound
