#include "geobound/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "geobound/report.hpp"
#include "geobound/symgeo.hpp"

namespace geobound {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified bounds on the output distribution of discrete probabilistic programs."};
  app.name("geobound");

  std::string input;
  std::string mode = "both";
  std::size_t unroll = 30;
  std::size_t invariant_size = 1;
  std::string objective = "ev";
  std::string var;
  std::size_t moments = 2;
  std::size_t limit = 50;
  std::string format = "text";
  std::uint64_t seed = 0;
  std::string smt_path;
  double timeout = 300;
  bool dump_system = false;
  bool timings = false;
  bool no_support = false;

  app.add_option("input", input, "Program file")->required();
  app.add_option("--mode", mode, "residual, geometric or both")
      ->check(CLI::IsMember({"residual", "geometric", "both"}))
      ->capture_default_str();
  app.add_option("--unroll", unroll, "Loop unrolling limit")->capture_default_str();
  app.add_option("--invariant-size", invariant_size, "Block size of loop invariants per unbounded variable")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--objective", objective, "Quantity the solver minimizes: mass, ev or tail")
      ->check(CLI::IsMember({"mass", "ev", "tail"}))
      ->capture_default_str();
  app.add_option("--var", var, "Variable for the objective and CSV output (default: first)");
  app.add_option("--moments", moments, "Highest moment to bound")->capture_default_str();
  app.add_option("--limit", limit, "Number of mass points per variable")->capture_default_str();
  app.add_option("--format", format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "Solver seed")->capture_default_str();
  app.add_option("--export-smt", smt_path, "Write the constraint system as SMT-LIB 2");
  app.add_option("--timeout", timeout, "Seconds before the analysis gives up (0: none)")->capture_default_str();
  app.add_flag("--dump-system", dump_system, "Print the constraint system instead of bounds");
  app.add_flag("--timings", timings, "Include wall-clock times in the output");
  app.add_flag("--no-support-refinement", no_support, "Ignore the residual support box");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "geobound: " << e.what() << '\n';
    return 2;
  }

  std::ifstream file(input);
  if (!file) {
    err << "geobound: cannot read " << input << '\n';
    return 1;
  }
  std::stringstream source;
  source << file.rdbuf();

  CoreProgram program;
  try {
    program = parse(source.str());
  } catch (const ParseError& e) {
    err << input << ':' << e.line() << ':' << e.column() << ": " << e.what() << '\n';
    return 1;
  }

  std::size_t var_index = 0;
  if (!var.empty()) {
    try {
      var_index = program.var_index(var);
    } catch (const std::out_of_range&) {
      err << "geobound: unknown variable " << var << '\n';
      return 2;
    }
  }

  AnalyzeOptions opts;
  opts.program_name = input;
  opts.mode = mode == "residual" ? AnalysisMode::Residual : mode == "geometric" ? AnalysisMode::Geometric : AnalysisMode::Both;
  opts.unroll = unroll;
  opts.invariant_size = invariant_size;
  opts.objective.kind = objective == "mass" ? Objective::Kind::TotalMass
                        : objective == "tail" ? Objective::Kind::TailDecay
                                              : Objective::Kind::ExpectedValue;
  opts.objective.var = var_index;
  opts.k_max = moments;
  opts.limit = limit;
  opts.seed = seed;
  opts.support_refinement = !no_support;
  const Deadline deadline = timeout > 0 ? Deadline(timeout) : Deadline();
  opts.deadline = &deadline;

  try {
    if (dump_system || !smt_path.empty()) {
      GenOptions gen;
      gen.invariant_size = invariant_size;
      gen.objective = opts.objective;
      gen.deadline = &deadline;
      const Egd init = egd_dirac(std::vector<std::size_t>(program.var_count, 0));
      const ConstraintSystem sys = unify_cyclic_decays(generate_system(program, init, gen).system);
      if (!smt_path.empty()) {
        std::ofstream smt(smt_path);
        if (!smt) {
          err << "geobound: cannot write " << smt_path << '\n';
          return 1;
        }
        smt << to_smtlib(sys);
      }
      if (dump_system) {
        out << dump(sys);
        return 0;
      }
    }

    BoundReport report = analyze(program, opts);
    if (!timings) report.solver.seconds.reset();
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    const Format f = format == "json" ? Format::Json : format == "csv" ? Format::Csv : Format::Text;
    out << render(report, f, var_index);
  } catch (const ResourceLimit& e) {
    err << "geobound: resource limit: " << e.what() << '\n';
    return 1;
  } catch (const Timeout&) {
    err << "geobound: timeout\n";
    return 1;
  } catch (const std::exception& e) {
    err << "geobound: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace geobound
