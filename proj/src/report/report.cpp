#include "geobound/report.hpp"

#include <charconv>
#include <chrono>
#include <iomanip>
#include <sstream>

#include "geobound/measure.hpp"
#include "geobound/support.hpp"
#include "json.hpp"

namespace geobound {
namespace {

using ojson = nlohmann::ordered_json;

Rational ipow(const Rational& base, std::size_t e) {
  Rational out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

std::optional<Rational> divide(const Rational& num, const Rational& den) {
  if (den <= 0) {
    if (num == 0) return Rational(0);
    return std::nullopt;
  }
  return Rational(num / den);
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string fmt(const Rational& r) { return fmt(to_double(r)); }

std::string fmt_hi(const std::optional<Rational>& hi) { return hi ? fmt(*hi) : "inf"; }

ojson hi_json(const std::optional<Rational>& hi) {
  if (!hi) return "inf";
  return to_double(*hi);
}

std::optional<Rational> hi_from_json(const ojson& j) {
  if (j.is_string()) return std::nullopt;
  return from_double(j.get<double>());
}

Interval interval_from_json(const ojson& j) { return {from_double(j.at("lo").get<double>()), hi_from_json(j.at("hi"))}; }

ojson interval_json(const Interval& i) {
  ojson j;
  j["lo"] = to_double(i.lo);
  j["hi"] = hi_json(i.hi);
  return j;
}

struct Geometric {
  Egd bound;
  Rational total;
};

std::optional<Geometric> run_geometric(const CoreProgram& p, const AnalyzeOptions& opts, BoundReport& r,
                                       GeometricResult* out) {
  const Egd init = egd_dirac(std::vector<std::size_t>(p.var_count, 0));
  GenOptions gen;
  gen.invariant_size = opts.invariant_size;
  gen.unroll = 0;
  gen.objective = opts.objective;
  gen.use_strict_join = opts.strict_join;
  gen.deadline = opts.deadline;
  try {
    const ConstraintSystem sys = unify_cyclic_decays(generate_system(p, init, gen).system);
    PenaltyOptions po = opts.penalty;
    po.seed = opts.seed;
    po.deadline = opts.deadline;
    SolveReport nonlinear = penalty_solve(sys, po);
    r.solver.status = to_string(nonlinear.status);
    r.solver.iterations = nonlinear.iterations;
    r.solver.seconds = nonlinear.seconds;
    if (out) out->nonlinear = nonlinear;
    if (nonlinear.status != SolveStatus::Feasible) return std::nullopt;

    gen.unroll = opts.unroll;
    const GeneratedSystem lin = relinearize(p, init, gen, extract_fix(sys, nonlinear.assignment->exact));
    SolveReport linear = optimize_linear(lin.system, {}, opts.deadline);
    *r.solver.seconds += linear.seconds;
    if (out) out->linear = linear;
    if (linear.status != SolveStatus::Feasible) {
      r.solver.status = to_string(linear.status);
      return std::nullopt;
    }
    Geometric g{evaluate(*lin.system.pool, lin.output, linear.assignment->exact), 0};
    g.total = total_mass(g.bound);
    if (out) out->bound = g.bound;
    return g;
  } catch (const Timeout&) {
    r.solver.status = "timeout";
    return std::nullopt;
  }
}

}  // namespace

std::string to_string(AnalysisMode m) {
  switch (m) {
    case AnalysisMode::Residual: return "residual";
    case AnalysisMode::Geometric: return "geometric";
    case AnalysisMode::Both: return "both";
  }
  return "?";
}

std::string to_string(Objective::Kind k) {
  switch (k) {
    case Objective::Kind::TotalMass: return "mass";
    case Objective::Kind::ExpectedValue: return "ev";
    case Objective::Kind::TailDecay: return "tail";
  }
  return "?";
}

BoundReport analyze(const CoreProgram& p, const AnalyzeOptions& opts, GeometricResult* geometric) {
  BoundReport r;
  r.program = opts.program_name;
  r.mode = opts.mode;
  r.unroll = opts.unroll;
  r.invariant_size = opts.invariant_size;
  r.objective = to_string(opts.objective.kind);

  MeasureOptions mo;
  mo.max_cells = opts.max_cells;
  mo.deadline = opts.deadline;
  const CoreProgram unrolled = unroll(p, opts.unroll);
  const std::vector<std::uint64_t> origin(p.var_count, 0);
  StateDist lower;
  try {
    lower = lower_semantics(unrolled, StateDist::dirac(origin), mo);
  } catch (const Timeout&) {
    r.solver.status = "timeout";
    r.warnings.push_back("timeout during unrolling; no bounds available");
    r.total_mass = Interval::unbounded_above(0);
    r.normalization = {0, Rational(1)};
    return r;
  }
  const Rational residual = 1 - lower.total();
  const SupportAnalysis support = analyze_support(unrolled, support_point(origin));
  const std::optional<std::optional<RangeBox>> residual_box =
      opts.support_refinement ? std::optional<std::optional<RangeBox>>(support.residual) : std::nullopt;

  const Rational lower_state = lower.state_mass();
  Interval z = normalization_bounds(lower, residual);
  r.total_mass = {lower_state, lower_state + residual};

  std::optional<Geometric> geo;
  if (opts.mode != AnalysisMode::Residual) {
    geo = run_geometric(p, opts, r, geometric);
    if (!geo) r.warnings.push_back("geometric bounds unavailable (" + r.solver.status + "); residual-mass bounds only");
  }
  const bool use_residual = opts.mode != AnalysisMode::Geometric || !geo;
  if (geo) {
    const Interval g{lower_state, geo->total};
    r.total_mass = use_residual ? r.total_mass.intersect(g) : g;
    const Interval gz{z.lo, geo->total};
    z = use_residual ? z.intersect(gz) : Interval{z.lo, std::min(*z.hi, geo->total)};
  }
  r.normalization = z;
  if (*z.hi == 0) r.warnings.push_back("all mass is conditioned away; normalized bounds omitted");

  for (std::size_t v = 0; v < p.var_count; ++v) {
    VariableReport vr;
    vr.name = p.var_names[v];
    const std::vector<Rational> lower_marginal = lower.marginal(v);
    std::optional<Egd> geo_marginal;
    if (geo) geo_marginal = marginal_of(geo->bound, v);

    for (std::size_t n = 0; n < opts.limit; ++n) {
      const Rational l = n < lower_marginal.size() ? lower_marginal[n] : Rational(0);
      Interval unnorm = Interval::unbounded_above(l);
      if (use_residual) {
        unnorm = posterior_bounds(lower, residual, MarginalRegion{v, n}, residual_box).unnormalized;
      }
      if (geo_marginal) {
        const std::size_t idx[1] = {n};
        unnorm = unnorm.intersect({l, mass_at(*geo_marginal, idx)});
      }
      vr.masses.push_back(unnorm);
      if (*z.hi > 0) {
        Interval norm{unnorm.lo / *z.hi, unnorm.hi ? divide(*unnorm.hi, z.lo) : std::nullopt};
        vr.normalized_masses.push_back(norm);
      }
    }

    const std::optional<Range> res_range =
        support.residual ? std::optional<Range>((*support.residual)[v]) : std::nullopt;
    const bool residual_bounded = residual == 0 || !support.residual || (opts.support_refinement && res_range->hi);
    for (std::size_t k = 1; *z.hi > 0 && k <= opts.k_max; ++k) {
      const Rational finite = finite_moment(lower, v, k);
      Interval b = Interval::unbounded_above(finite / *z.hi);
      if (use_residual && residual_bounded) {
        Rational extra = 0;
        if (residual != 0 && support.residual) extra = residual * ipow(Rational(static_cast<unsigned long>(*res_range->hi)), k);
        b = b.intersect({b.lo, divide(finite + extra, z.lo)});
      }
      if (geo_marginal) b = b.intersect({b.lo, divide(moment(*geo_marginal, k), z.lo)});
      vr.moments.push_back({k, b});
    }

    if (geo) vr.tail_decay = geo->bound.decay[v];
    if (use_residual && residual_bounded) vr.tail_decay = Rational(0);
    r.variables.push_back(std::move(vr));
  }
  return r;
}

std::string render(const BoundReport& r, Format format, std::size_t csv_var) {
  if (format == Format::Json) {
    ojson j;
    j["program"] = r.program;
    j["mode"] = to_string(r.mode);
    j["unroll"] = r.unroll;
    j["invariant_size"] = r.invariant_size;
    j["objective"] = r.objective;
    j["variables"] = ojson::array();
    for (const auto& v : r.variables) {
      ojson jv;
      jv["name"] = v.name;
      jv["masses"] = ojson::array();
      for (std::size_t n = 0; n < v.masses.size(); ++n) {
        ojson m = interval_json(v.masses[n]);
        m = ojson{{"n", n}, {"lo", m["lo"]}, {"hi", m["hi"]}};
        jv["masses"].push_back(m);
      }
      jv["normalized_masses"] = ojson::array();
      for (std::size_t n = 0; n < v.normalized_masses.size(); ++n) {
        ojson m = interval_json(v.normalized_masses[n]);
        jv["normalized_masses"].push_back(ojson{{"n", n}, {"lo", m["lo"]}, {"hi", m["hi"]}});
      }
      jv["moments"] = ojson::array();
      for (const auto& m : v.moments) {
        ojson b = interval_json(m.bound);
        jv["moments"].push_back(ojson{{"k", m.k}, {"lo", b["lo"]}, {"hi", b["hi"]}});
      }
      jv["tail_decay"] = v.tail_decay ? ojson(to_double(*v.tail_decay)) : ojson(nullptr);
      j["variables"].push_back(jv);
    }
    j["total_mass"] = interval_json(r.total_mass);
    j["normalization"] = interval_json(r.normalization);
    j["solver"] = ojson{{"status", r.solver.status},
                        {"iterations", r.solver.iterations},
                        {"seconds", r.solver.seconds ? ojson(*r.solver.seconds) : ojson(nullptr)}};
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  if (format == Format::Csv) {
    os << "n,lo,hi\n";
    if (csv_var >= r.variables.size()) return os.str();
    const auto& v = r.variables[csv_var];
    const auto& rows = v.normalized_masses.empty() ? v.masses : v.normalized_masses;
    for (std::size_t n = 0; n < rows.size(); ++n) os << n << ',' << fmt(rows[n].lo) << ',' << fmt_hi(rows[n].hi) << '\n';
    return os.str();
  }

  os << "program        " << r.program << '\n';
  os << "mode           " << to_string(r.mode) << " (unroll " << r.unroll << ", invariant size " << r.invariant_size
     << ", objective " << r.objective << ")\n";
  os << "solver         " << r.solver.status;
  if (r.solver.iterations) os << ", " << r.solver.iterations << " iterations";
  if (r.solver.seconds) os << ", " << fmt(*r.solver.seconds) << " s";
  os << '\n';
  os << "normalization  [" << fmt(r.normalization.lo) << ", " << fmt_hi(r.normalization.hi) << "]\n";
  os << "total mass     [" << fmt(r.total_mass.lo) << ", " << fmt_hi(r.total_mass.hi) << "]\n";
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  for (const auto& v : r.variables) {
    os << "\nvariable " << v.name << '\n';
    os << "  tail decay   " << (v.tail_decay ? (*v.tail_decay == 0 ? std::string("0 (finite support)") : fmt(*v.tail_decay)) : "unknown") << '\n';
    for (const auto& m : v.moments) {
      os << "  E[" << v.name << '^' << m.k << "]  [" << fmt(m.bound.lo) << ", " << fmt_hi(m.bound.hi) << "]\n";
    }
    os << "  " << std::left << std::setw(6) << "n" << std::setw(44) << "mass" << "posterior\n";
    for (std::size_t n = 0; n < v.masses.size(); ++n) {
      const Interval& m = v.masses[n];
      if (m.hi && *m.hi == 0) continue;
      os << "  " << std::setw(6) << n << std::setw(44) << ("[" + fmt(m.lo) + ", " + fmt_hi(m.hi) + "]");
      if (n < v.normalized_masses.size()) {
        const Interval& q = v.normalized_masses[n];
        os << '[' << fmt(q.lo) << ", " << fmt_hi(q.hi) << ']';
      }
      os << '\n';
    }
  }
  return os.str();
}

BoundReport report_from_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  BoundReport r;
  r.program = j.at("program").get<std::string>();
  const std::string mode = j.at("mode").get<std::string>();
  r.mode = mode == "residual" ? AnalysisMode::Residual : mode == "geometric" ? AnalysisMode::Geometric : AnalysisMode::Both;
  r.unroll = j.at("unroll").get<std::size_t>();
  r.invariant_size = j.at("invariant_size").get<std::size_t>();
  r.objective = j.at("objective").get<std::string>();
  for (const auto& jv : j.at("variables")) {
    VariableReport v;
    v.name = jv.at("name").get<std::string>();
    for (const auto& m : jv.at("masses")) v.masses.push_back(interval_from_json(m));
    for (const auto& m : jv.at("normalized_masses")) v.normalized_masses.push_back(interval_from_json(m));
    for (const auto& m : jv.at("moments")) v.moments.push_back({m.at("k").get<std::size_t>(), interval_from_json(m)});
    if (!jv.at("tail_decay").is_null()) v.tail_decay = from_double(jv.at("tail_decay").get<double>());
    r.variables.push_back(std::move(v));
  }
  r.total_mass = interval_from_json(j.at("total_mass"));
  r.normalization = interval_from_json(j.at("normalization"));
  const auto& s = j.at("solver");
  r.solver.status = s.at("status").get<std::string>();
  r.solver.iterations = s.at("iterations").get<std::size_t>();
  if (!s.at("seconds").is_null()) r.solver.seconds = s.at("seconds").get<double>();
  for (const auto& w : j.at("warnings")) r.warnings.push_back(w.get<std::string>());
  return r;
}

}  // namespace geobound
