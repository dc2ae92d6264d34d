#include "doctest.h"

#include "geobound/lang.hpp"

using namespace geobound;

namespace {

bool holds_in(const Event& e, std::uint64_t x) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarEq>) return x == n.value;
        else if constexpr (std::is_same_v<T, Flip>) return n.prob == 1;
        else if constexpr (std::is_same_v<T, Not>) return !holds_in(*n.inner, x);
        else return holds_in(*n.lhs, x) && holds_in(*n.rhs, x);
      },
      e.node);
}

}  // namespace

TEST_CASE("observe desugars to a conditional failure") {
  const auto p = parse("observe flip(1/2);");
  const auto expected = Statement::ite(Event::flip(ratio(1, 2)), Statement::skip(), Statement::fail());
  CHECK(*p.body == *expected);
}

TEST_CASE("skip parses to Skip") {
  const auto p = parse("skip;");
  CHECK(std::holds_alternative<Skip>(p.body->node));
  CHECK(p.var_count == 1);
}

TEST_CASE("x <= 1 follows the sugar chain") {
  const auto p = parse("x := 0; observe x <= 1;");
  const auto& ite = std::get<IfThenElse>(std::get<Seq>(p.body->node).second->node);
  const auto expected =
      Event::negate(Event::conj(Event::negate(Event::var_eq(0, 0)), Event::negate(Event::var_eq(0, 1))));
  CHECK(*ite.cond == *expected);
  for (std::uint64_t x = 0; x <= 2; ++x) CHECK(holds_in(*ite.cond, x) == (x <= 1));
}

TEST_CASE("comparison sugar agrees with arithmetic") {
  const char* ops[] = {"<", "<=", ">", ">=", "!=", "=="};
  for (const char* op : ops) {
    for (std::uint64_t c = 0; c <= 3; ++c) {
      const auto p = parse("x := 0;");
      const auto e = parse_event(std::string("x ") + op + " " + std::to_string(c), p);
      for (std::uint64_t x = 0; x <= 5; ++x) {
        const std::string o = op;
        const bool want = o == "<" ? x < c : o == "<=" ? x <= c : o == ">" ? x > c : o == ">=" ? x >= c
                                                                 : o == "!=" ? x != c : x == c;
        CHECK(holds_in(*e, x) == want);
      }
    }
  }
}

TEST_CASE("x in set and x < 0") {
  const auto p = parse("x := 0;");
  const auto e = parse_event("x in {2,4,6}", p);
  for (std::uint64_t x = 0; x <= 7; ++x) CHECK(holds_in(*e, x) == (x == 2 || x == 4 || x == 6));
  CHECK(*parse_event("x < 0", p) == *Event::flip(0));
}

TEST_CASE("assignments and distributions") {
  const auto p = parse("x := 3;");
  CHECK(*p.body == *Statement::seq(Statement::set_zero(0), Statement::add_const(0, 3)));
  const auto g = parse("y ~ geometric(1/3);");
  const auto& s = std::get<Seq>(g.body->node);
  const auto& w = std::get<While>(s.second->node);
  CHECK(*w.cond == *Event::negate(Event::flip(ratio(1, 3))));
  CHECK(g.loop_count == 1);
  const auto b = parse("y ~ bernoulli(0.25);");
  CHECK(std::get<Flip>(std::get<IfThenElse>(b.body->node).cond->node).prob == ratio(1, 4));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("x := 1;\nobserve flip(3/2);"), ParseError);
  try {
    parse("x := 1;\ny += ;");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
  }
  CHECK_THROWS_AS(parse("x := 1.5;"), ParseError);
  CHECK_THROWS_AS(parse("observe z = 1;"), ParseError);
  CHECK_THROWS_AS(parse("x := 1"), ParseError);
  CHECK_THROWS_AS(parse("x ~ poisson(1);"), ParseError);
}

TEST_CASE("print then parse is the identity") {
  const char* programs[] = {
      "x := 3; y ~ geometric(1/2); observe x <= 1 || y in {2,5};",
      "c := 1; while c = 1 { n += 1; c ~ bernoulli(2/3); } observe n != 2;",
      "{ x += 1; } [1/3] { x -= 2; } if x > 0 { fail; } else if flip(0.5) { y := 2; }",
      "t ~ uniform(1,6); while !(t = 6) { t ~ uniform(2,4); k += 1; }",
  };
  for (const char* src : programs) {
    const auto p = parse(src);
    const auto q = parse(print(p));
    CHECK(p == q);
    CHECK(print(p) == print(q));
  }
}

TEST_CASE("unroll shapes") {
  const auto p = parse("while flip(1/2) { x += 1; }");
  const auto& w = std::get<While>(p.body->node);
  CHECK(*unroll(p.body, 0) == *p.body);
  const auto one = Statement::ite(w.cond, Statement::seq(w.body, p.body), Statement::skip());
  CHECK(*unroll(p.body, 1) == *one);

  const auto q = parse("x += 1; while flip(1/2) { while x = 1 { x += 1; } }");
  const auto& s = std::get<Seq>(q.body->node);
  const auto uq = unroll(q.body, 3);
  const auto& us = std::get<Seq>(uq->node);
  CHECK(*us.first == *s.first);
  CHECK(*us.second == *unroll(s.second, 3));
  CHECK(count_loops(uq) == count_loops(q.body));
  CHECK(count_loops(uq) == 2);
}
