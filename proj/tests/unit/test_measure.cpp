#include "doctest.h"

#include <random>

#include "geobound/kernels.hpp"
#include "geobound/measure.hpp"
#include "oracle.hpp"
#include "test_support_files.hpp"

using namespace geobound;

namespace {

StateDist start_of(const CoreProgram& p) { return StateDist::dirac(std::vector<std::uint64_t>(p.var_count, 0)); }

}  // namespace

TEST_CASE("die paradox at u = 3") {
  const auto p = load_benchmark("die_paradox");
  const auto mu = start_of(p);
  const auto lo = lower_semantics(unroll(p, 3), mu);
  CHECK(lo.failure == ratio(2, 3));
  CHECK(lo.mass_at(std::vector<std::uint64_t>{1, 6}) == ratio(1, 6));
  CHECK(lo.mass_at(std::vector<std::uint64_t>{2, 6}) == ratio(1, 18));
  const Rational r = residual_mass(p, mu, 3);
  CHECK(r == ratio(1, 9));
  CHECK(finite_moment(lo, 0, 1) == ratio(5, 18));

  const auto b16 = posterior_bounds(lo, r, PointRegion{{1, 6}});
  CHECK(b16.normalized.lo == ratio(1, 2));
  CHECK(*b16.normalized.hi == ratio(5, 4));
  const auto b26 = posterior_bounds(lo, r, PointRegion{{2, 6}});
  CHECK(b26.normalized.lo == ratio(1, 6));
  CHECK(*b26.normalized.hi == ratio(3, 4));
  const auto b36 = posterior_bounds(lo, r, PointRegion{{3, 6}});
  CHECK(b36.normalized.lo == 0);
  CHECK(*b36.normalized.hi == ratio(1, 2));
  const auto nb = normalization_bounds(lo, r);
  CHECK(nb.lo == ratio(2, 9));
  CHECK(*nb.hi == ratio(1, 3));
}

TEST_CASE("restriction examples") {
  const auto p = parse("d ~ uniform(1,6);");
  const auto mu = lower_semantics(p, start_of(p));
  for (std::uint64_t v = 1; v <= 6; ++v) CHECK(mu.mass_at(std::vector<std::uint64_t>{v}) == ratio(1, 6));
  const auto even = restrict_event(mu, *parse_event("d in {2,4,6}", p));
  for (std::uint64_t v = 1; v <= 6; ++v) {
    CHECK(even.mass_at(std::vector<std::uint64_t>{v}) == (v % 2 == 0 ? ratio(1, 6) : Rational(0)));
  }
  auto with_fail = mu;
  with_fail.failure = ratio(1, 3);
  const auto half = restrict_event(with_fail, *Event::flip(ratio(1, 2)));
  CHECK(half.failure == 0);
  CHECK(half.state_mass() == ratio(1, 2));
  const auto dirac = StateDist::dirac({1, 6});
  CHECK(restrict_event(dirac, *Event::var_eq(1, 6)) == dirac);
}

TEST_CASE("simple transfers") {
  const auto p = parse("x += 2;");
  CHECK(lower_semantics(p, StateDist::dirac({3})) == StateDist::dirac({5}));
  const auto q = parse("x -= 1;");
  auto two = add(StateDist::dirac({0}), StateDist::dirac({1}));
  const auto dec = lower_semantics(q, two);
  CHECK(dec.mass_at(std::vector<std::uint64_t>{0}) == 2);
  CHECK(lower_semantics(parse("skip;"), two) == two);
  const auto f = lower_semantics(parse("fail;"), two);
  CHECK(f.failure == 2);
  CHECK(f.state_mass() == 0);
}

TEST_CASE("geometric counter residual is 2^-u") {
  const auto p = load_benchmark("geometric_counter");
  for (std::size_t u = 0; u <= 12; ++u) {
    CHECK(residual_mass(p, start_of(p), u) == pow(ratio(1, 2), u));
  }
}

TEST_CASE("lower semantics matches the sparse oracle on every benchmark") {
  const char* names[] = {"die_paradox", "asym_rw", "coupon_collector2", "sum_geometrics", "von_neumann",
                         "knuth_yao", "geometric_minus_one", "conditioned_geometric", "bounded_loop",
                         "imprecise_tails", "power_of_two", "symmetric_rw", "geometric_counter"};
  for (const char* name : names) {
    CAPTURE(name);
    const auto p = load_benchmark(name);
    for (std::size_t u : {0, 1, 4, 8}) {
      const auto up = unroll(p, u);
      const auto got = oracle::from_dist(lower_semantics(up, start_of(p)));
      const auto want = oracle::run(up.body, oracle::start(p.var_count), std::nullopt);
      CHECK(got == want);
    }
  }
}

TEST_CASE("residual mass is monotone in u") {
  const char* names[] = {"die_paradox", "geometric_counter", "asym_rw", "coupon_collector2", "sum_geometrics"};
  for (const char* name : names) {
    CAPTURE(name);
    const auto p = load_benchmark(name);
    Rational prev = 2;
    for (std::size_t u = 0; u <= 10; ++u) {
      const Rational r = residual_mass(p, start_of(p), u);
      CHECK(r >= 0);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("bounded loops: unrolling preserves semantics and the sandwich holds") {
  const auto p = load_benchmark("bounded_loop");
  const auto exact = oracle::run(p.body, oracle::start(p.var_count), 100);
  for (std::size_t u = 0; u <= 5; ++u) {
    CHECK(oracle::run(unroll(p.body, u), oracle::start(p.var_count), 100) == exact);
    const auto lo = lower_semantics(unroll(p, u), start_of(p));
    const Rational r = residual_mass(p, start_of(p), u);
    for (const auto& [s, v] : exact) {
      if (s == oracle::kFail) continue;
      CHECK(lo.mass_at(s) <= v);
      CHECK(v <= lo.mass_at(s) + r);
    }
    if (u >= 4) CHECK(r == 0);
    if (u == 3) CHECK(r == 1);
  }
}

TEST_CASE("linearity of transfers") {
  const auto p = load_benchmark("coupon_collector2");
  const auto up = unroll(p, 3);
  const auto a = StateDist::dirac({0, 0});
  const auto b = StateDist::dirac({1, 2});
  const Rational k = ratio(2, 7);
  const auto lhs = lower_semantics(up, add(scale(a, k), b));
  const auto rhs = add(scale(lower_semantics(up, a), k), lower_semantics(up, b));
  CHECK(lhs == rhs);
}

TEST_CASE("resource limit") {
  const auto p = parse("while flip(1/2) { x += 1; y += 1; { x += 1; } [1/2] { y += 1; } }");
  MeasureOptions opts;
  opts.max_cells = 50;
  CHECK_THROWS_AS(lower_semantics(unroll(p, 30), StateDist::dirac({0, 0}), opts), ResourceLimit);
}

TEST_CASE("serial and parallel kernels agree") {
  std::mt19937 rng(11);
  const auto p = parse("x := 0; y := 0; z := 0;");
  const auto e = parse_event("(x = 3 || y in {1,2}) && !(z = 4) && flip(1/3)", p);
  const Shape shape{20, 15, 18};
  const std::vector<std::uint64_t> offset{1, 0, 2};
  const auto ws = kernels::event_weights_serial(*e, offset, shape);
  const auto wp = kernels::event_weights_parallel(*e, offset, shape);
  CHECK(ws == wp);
  Tensor<Rational> a(shape);
  for (auto& v : a.data()) v = ratio(rng() % 17, rng() % 13 + 1);
  auto b = a;
  kernels::multiply_serial(a, ws);
  kernels::multiply_parallel(b, wp);
  CHECK(a == b);
  CHECK(kernels::sum_serial(a) == kernels::sum_parallel(b));
  Tensor<Rational> d1(Shape{25, 20, 30}), d2(Shape{25, 20, 30});
  kernels::accumulate_serial(d1, a, Index{2, 3, 4});
  kernels::accumulate_parallel(d2, b, Index{2, 3, 4});
  CHECK(d1 == d2);
}
