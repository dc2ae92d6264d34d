#pragma once

// Sparse reference interpreter used as a test oracle. Measures are maps from
// states to masses; failure mass is kept under the key `kFail`.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geobound/lang.hpp"
#include "geobound/measure.hpp"

namespace oracle {

using geobound::Rational;
using State = std::vector<std::uint64_t>;
using Sparse = std::map<State, Rational>;

inline const State kFail = {~std::uint64_t{0}};

inline bool holds(const geobound::Event& e, const State& s, Rational& w) {
  using namespace geobound;
  if (const auto* v = std::get_if<VarEq>(&e.node)) {
    w = s[v->var] == v->value ? 1 : 0;
  } else if (const auto* f = std::get_if<Flip>(&e.node)) {
    w = f->prob;
  } else if (const auto* n = std::get_if<Not>(&e.node)) {
    Rational inner;
    holds(*n->inner, s, inner);
    w = 1 - inner;
  } else {
    const auto& a = std::get<And>(e.node);
    Rational l, r;
    holds(*a.lhs, s, l);
    holds(*a.rhs, s, r);
    w = l * r;
  }
  return w != 0;
}

inline void put(Sparse& m, const State& s, const Rational& v) {
  if (v == 0) return;
  m[s] += v;
}

/// loop_fuel = nullopt: loops give zero (lower semantics).
/// Otherwise loops iterate until no mass remains inside or the fuel runs out.
inline Sparse run(const geobound::StmtPtr& stmt, const Sparse& mu, std::optional<int> loop_fuel) {
  using namespace geobound;
  Sparse out;
  if (const auto* q = std::get_if<Seq>(&stmt->node)) {
    return run(q->second, run(q->first, mu, loop_fuel), loop_fuel);
  }
  if (std::holds_alternative<Fail>(stmt->node)) {
    for (const auto& [s, v] : mu) put(out, kFail, v);
    return out;
  }
  if (const auto* w = std::get_if<While>(&stmt->node)) {
    if (!loop_fuel) return out;
    Sparse cur = mu;
    for (int it = 0; it <= *loop_fuel && !cur.empty(); ++it) {
      Sparse inside;
      for (const auto& [s, v] : cur) {
        if (s == kFail) {
          put(out, s, v);
          continue;
        }
        Rational wt;
        holds(*w->cond, s, wt);
        put(inside, s, v * wt);
        put(out, s, v * (1 - wt));
      }
      cur = run(w->body, inside, loop_fuel);
    }
    return out;
  }
  if (const auto* i = std::get_if<IfThenElse>(&stmt->node)) {
    Sparse yes, no;
    for (const auto& [s, v] : mu) {
      if (s == kFail) {
        put(out, s, v);
        continue;
      }
      Rational wt;
      holds(*i->cond, s, wt);
      put(yes, s, v * wt);
      put(no, s, v * (1 - wt));
    }
    for (const auto& [s, v] : run(i->then_branch, yes, loop_fuel)) put(out, s, v);
    for (const auto& [s, v] : run(i->else_branch, no, loop_fuel)) put(out, s, v);
    return out;
  }
  for (const auto& [s0, v] : mu) {
    State s = s0;
    if (s != kFail) {
      if (const auto* z = std::get_if<SetZero>(&stmt->node)) s[z->var] = 0;
      else if (const auto* a = std::get_if<AddConst>(&stmt->node)) s[a->var] += a->amount;
      else if (const auto* d = std::get_if<DecClamped>(&stmt->node)) s[d->var] = s[d->var] > 0 ? s[d->var] - 1 : 0;
    }
    put(out, s, v);
  }
  return out;
}

inline Sparse from_dist(const geobound::StateDist& d) {
  Sparse m;
  d.masses.for_each([&](const geobound::Index& idx, const Rational& v) {
    State s(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) s[k] = idx[k] + d.offset[k];
    put(m, s, v);
  });
  put(m, kFail, d.failure);
  return m;
}

inline Sparse start(std::size_t dims) { return Sparse{{State(dims, 0), Rational(1)}}; }

inline Rational total(const Sparse& m) {
  Rational t = 0;
  for (const auto& [s, v] : m) t += v;
  return t;
}

}  // namespace oracle
