#include "doctest.h"

#include <random>
#include <string>

#include "geobound/egd.hpp"
#include "geobound/measure.hpp"
#include "gen.hpp"
#include "oracle.hpp"

using namespace geobound;

namespace {

// Renders expressions as text so that rule shapes can be compared with the
// hand-written formulas.
struct TextOps {
  using Value = std::string;
  std::string zero() { return "0"; }
  std::string one() { return "1"; }
  std::string constant(const Rational& r) { return geobound::to_string(r); }
  std::string add(const std::string& a, const std::string& b) {
    if (a == "0") return b;
    if (b == "0") return a;
    return a + "+" + b;
  }
  std::string mul(const std::string& a, const std::string& b) {
    if (a == "0" || b == "0") return "0";
    if (a == "1") return b;
    if (b == "1") return a;
    return a + "*" + b;
  }
  std::string div(const std::string& a, const std::string& b) { return a + "/(" + b + ")"; }
  std::string nsub(const std::string& a, const std::string& b) {
    if (b == "0") return a;
    if (a == b) return "0";
    return a + "-" + b;
  }
  std::string one_minus(const std::string& a) { return "1-" + a; }
};

BasicEgd<std::string> example_p() {
  Tensor<std::string> block(Shape{2, 2});
  block(Index{0, 0}) = "P00";
  block(Index{0, 1}) = "P01";
  block(Index{1, 0}) = "P10";
  block(Index{1, 1}) = "P11";
  return {block, {"a1", "a2"}};
}

Rational tail_bound(const Rational& first_term, const Rational& alpha, std::size_t n, std::size_t k) {
  // Ratio test bound for sum_{m>=0} alpha^m (n+m)^k starting at `first_term`.
  const Rational q = alpha * pow(ratio(n + 1, n), k);
  REQUIRE(q < 1);
  return first_term / (1 - q);
}

}  // namespace

TEST_CASE("mass_at examples") {
  TextOps t;
  const auto p = example_p();
  CHECK(egd_ops::entry_at(t, p, Index{2, 4}) == "P11*a1*a2*a2*a2");
  CHECK(egd_ops::entry_at(t, p, Index{1, 0}) == "P10");
  const auto g = make_egd(Tensor<Rational>(Shape{2}), {ratio(1, 2)});
  auto h = g;
  h.block.flat(0) = ratio(1, 2);
  h.block.flat(1) = ratio(1, 4);
  CHECK(mass_at(h, Index{4}) == ratio(1, 32));
}

TEST_CASE("expansion adds rows with decay factors") {
  TextOps t;
  const auto q = egd_ops::expand(t, example_p(), Shape{3, 2});
  CHECK(q.block(Index{2, 0}) == "P10*a1");
  CHECK(q.block(Index{2, 1}) == "P11*a1");
  const auto same = egd_ops::expand(t, example_p(), Shape{2, 2});
  CHECK(same.block == example_p().block);
}

TEST_CASE("order unfolds to the expected inequality list") {
  TextOps t;
  Tensor<std::string> qb(Shape{1, 4});
  for (std::size_t j = 0; j < 4; ++j) qb(Index{0, j}) = "Q0" + std::to_string(j);
  const BasicEgd<std::string> q{qb, {"b1", "b2"}};
  std::vector<std::string> got;
  egd_ops::for_each_le(t, example_p(), q, [&](const std::string& l, const std::string& r) { got.push_back(l + "<=" + r); });
  const std::vector<std::string> want = {
      "a1<=b1",          "a2<=b2",          "P00<=Q00",           "P01<=Q01",
      "P01*a2<=Q02",     "P01*a2*a2<=Q03",  "P10<=Q00*b1",        "P11<=Q01*b1",
      "P11*a2<=Q02*b1",  "P11*a2*a2<=Q03*b1"};
  CHECK(got == want);
}

TEST_CASE("event and statement rules on the running example") {
  TextOps t;
  const auto p = example_p();
  const auto r = egd_ops::restrict(t, p, *Event::var_eq(1, 2));
  CHECK(r.block.shape() == Shape{2, 4});
  CHECK(r.block(Index{0, 2}) == "P01*a2");
  CHECK(r.block(Index{1, 3}) == "0");
  CHECK(r.decay[1] == "0");
  const auto n = egd_ops::restrict(t, p, *Event::negate(Event::var_eq(1, 2)));
  CHECK(n.block(Index{0, 2}) == "0");
  CHECK(n.block(Index{0, 3}) == "P01*a2*a2");
  CHECK(n.decay[1] == "a2");
  const auto z = egd_ops::set_zero(t, p, 1);
  CHECK(z.block(Index{0, 0}) == "P00+P01/(1-a2)");
  CHECK(z.block(Index{1, 1}) == "0");
  const auto s = egd_ops::add_const(t, p, 1, 2);
  CHECK(s.block(Index{1, 3}) == "P11");
  CHECK(s.block(Index{1, 1}) == "0");
  const auto d = egd_ops::dec(t, p, 1);
  CHECK(d.block.shape() == Shape{2, 2});
  CHECK(d.block(Index{0, 0}) == "P00+P01");
  CHECK(d.block(Index{1, 1}) == "P11*a2");
}

TEST_CASE("join of the order example") {
  TextOps t;
  Tensor<std::string> qb(Shape{1, 4});
  for (std::size_t j = 0; j < 4; ++j) qb(Index{0, j}) = "Q0" + std::to_string(j);
  const BasicEgd<std::string> q{qb, {"b1", "b2"}};
  const auto j = egd_ops::join(t, example_p(), q, [](const std::string& x, const std::string& y) { return "max(" + x + "," + y + ")"; });
  CHECK(j.block(Index{0, 2}) == "P01*a2+Q02");
  CHECK(j.block(Index{1, 0}) == "P10+Q00*b1");
  CHECK(j.block(Index{1, 3}) == "P11*a2*a2+Q03*b1");
  CHECK(j.decay[0] == "max(a1,b1)");
}

TEST_CASE("moments and total mass") {
  const auto geo = make_egd(Tensor<Rational>(Shape{1}, ratio(2, 3)), {ratio(1, 3)});
  CHECK(total_mass(geo) == 1);
  CHECK(moment(geo, 1) == ratio(1, 2));
  CHECK(moment(make_egd(Tensor<Rational>(Shape{1}, Rational(1)), {Rational(0)}), 3) == 0);
  Tensor<Rational> b(Shape{2});
  b.flat(0) = ratio(1, 2);
  b.flat(1) = ratio(1, 4);
  CHECK(moment(make_egd(b, {ratio(1, 2)}), 1) == 1);
  CHECK(total_mass(make_egd(Tensor<Rational>(Shape{3, 2}), {ratio(1, 2), 0})) == 0);
  CHECK(egd_ops::eulerian_row(3) == std::vector<std::uint64_t>{1, 4, 1});
}

TEST_CASE("property: expansion keeps the measure") {
  std::mt19937 rng(101);
  for (int c = 0; c < 500; ++c) {
    const auto g = gen::egd(rng, rng() % 3 + 1);
    Shape bigger = g.block.shape();
    for (auto& e : bigger) e += rng() % 3;
    const auto h = expand(g, bigger);
    for (int s = 0; s < 20; ++s) {
      const auto idx = gen::index(rng, g.dims());
      CHECK(mass_at(g, idx) == mass_at(h, idx));
    }
  }
}

TEST_CASE("property: egd_le implies pointwise order") {
  std::mt19937 rng(202);
  int positive = 0;
  for (int c = 0; c < 500; ++c) {
    const auto a = gen::egd(rng, rng() % 3 + 1);
    const auto b = rng() % 4 == 0 ? gen::egd(rng, a.dims()) : gen::dominating(rng, a);
    if (!egd_le(a, b)) continue;
    ++positive;
    for (int s = 0; s < 100; ++s) {
      const auto idx = gen::index(rng, a.dims(), 20);
      CHECK(mass_at(a, idx) <= mass_at(b, idx));
    }
  }
  CHECK(positive > 300);
}

TEST_CASE("property: marginals and moments match truncated enumeration") {
  std::mt19937 rng(303);
  const std::size_t n = 200;
  for (int c = 0; c < 200; ++c) {
    const auto g = gen::egd(rng, 2);
    const auto m = marginalize(g, 1);
    for (std::size_t i = 0; i < 5; ++i) {
      Rational partial = 0;
      for (std::size_t j = 0; j <= n; ++j) partial += mass_at(g, Index{i, j});
      const Rational tail = mass_at(g, Index{i, n + 1}) / (1 - g.decay[1]);
      CHECK(mass_at(m, Index{i}) == partial + tail);
    }
    const auto g1 = marginalize(g, 0);
    for (std::size_t k = 0; k <= 2; ++k) {
      Rational partial = 0;
      for (std::size_t j = 0; j <= n; ++j) partial += mass_at(g1, Index{j}) * pow(Rational(static_cast<unsigned long>(j)), k);
      const Rational exact = moment(g1, k);
      const Rational first = mass_at(g1, Index{n + 1}) * pow(Rational(static_cast<unsigned long>(n + 1)), k);
      CHECK(exact >= partial);
      CHECK(exact - partial <= tail_bound(first, g1.decay[0], n + 1, k));
    }
  }
}

TEST_CASE("property: join dominates the sum") {
  std::mt19937 rng(404);
  for (int c = 0; c < 200; ++c) {
    const std::size_t dims = rng() % 3 + 1;
    const auto a = gen::egd(rng, dims);
    const auto b = gen::egd(rng, dims);
    const auto j = join_strict(a, b);
    CHECK(egd_le(a, j));
    for (int s = 0; s < 100; ++s) {
      const auto idx = gen::index(rng, dims, 15);
      CHECK(mass_at(j, idx) >= mass_at(a, idx) + mass_at(b, idx));
    }
    RationalOps ops;
    const auto z = join_strict(a, egd_ops::fail(ops, dims));
    for (int s = 0; s < 20; ++s) {
      const auto idx = gen::index(rng, dims, 15);
      CHECK(mass_at(z, idx) == mass_at(a, idx));
    }
  }
}

TEST_CASE("tail readout") {
  std::mt19937 rng(505);
  for (int c = 0; c < 50; ++c) {
    const auto g = gen::egd(rng, 1);
    const std::size_t d = g.block.extent(0) - 1;
    for (std::size_t m = 0; m < 10; ++m) {
      CHECK(mass_at(g, Index{d + m}) == g.block.flat(d) * pow(g.decay[0], m));
    }
  }
}

TEST_CASE("loop-free geometric semantics is exact under strict joins") {
  std::mt19937 rng(606);
  for (int c = 0; c < 100; ++c) {
    const std::size_t vars = rng() % 3 + 1;
    const auto prog = gen::loop_free(rng, vars, 6);
    const auto out = transfer_loop_free(prog, egd_dirac(std::vector<std::size_t>(vars, 0)));
    const auto exact = oracle::run(prog, oracle::start(vars), std::nullopt);
    Rational covered = 0;
    for (const auto& [s, v] : exact) {
      if (s == oracle::kFail) continue;
      std::vector<std::size_t> idx(s.begin(), s.end());
      CHECK(mass_at(out, idx) == v);
      covered += v;
    }
    CHECK(total_mass(out) == covered);
  }
}
