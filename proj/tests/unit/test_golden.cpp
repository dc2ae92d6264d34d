#include "doctest.h"

#include <filesystem>
#include <regex>

#include "geobound/report.hpp"
#include "test_support_files.hpp"

using namespace geobound;

// Every shipped benchmark carries its variable of interest and the true
// expected value in its header comments.
TEST_CASE("golden benchmarks bracket the true expected value") {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(GEOBOUND_BENCHMARKS_DIR)) {
    if (e.path().extension() == ".prob") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  REQUIRE(names.size() >= 10);

  const std::regex var_re("# expect-var: (\\w+)");
  const std::regex ev_re("# expect-ev: (\\S+)");
  for (const auto& name : names) {
    CAPTURE(name);
    const std::string src = benchmark_source(name);
    std::smatch vm, em;
    REQUIRE(std::regex_search(src, vm, var_re));
    REQUIRE(std::regex_search(src, em, ev_re));
    const CoreProgram p = parse(src);
    const std::size_t v = p.var_index(vm[1].str());

    AnalyzeOptions o;
    o.program_name = name;
    o.limit = 10;
    o.objective = {Objective::Kind::ExpectedValue, v};
    const BoundReport r = analyze(p, o);
    const Interval ev = r.variables[v].moments.at(0).bound;
    if (em[1] == "inf") {
      CHECK(r.solver.status == "no_solution_found");
      CHECK_FALSE(ev.hi.has_value());
    } else {
      const Rational truth = parse_rational(em[1].str());
      CHECK(ev.contains(truth));
      CHECK(ev.hi.has_value());
    }
  }
}
