#include <stdexcept>
#include <unordered_set>

#include "geobound/lang.hpp"

namespace geobound {

EventPtr Event::var_eq(std::size_t var, std::uint64_t value) {
  return std::make_shared<const Event>(Event{VarEq{var, value}});
}

EventPtr Event::flip(Rational prob) {
  return std::make_shared<const Event>(Event{Flip{std::move(prob)}});
}

EventPtr Event::negate(EventPtr inner) {
  return std::make_shared<const Event>(Event{Not{std::move(inner)}});
}

EventPtr Event::conj(EventPtr lhs, EventPtr rhs) {
  return std::make_shared<const Event>(Event{And{std::move(lhs), std::move(rhs)}});
}

namespace {

EventPtr strip_or_negate(const EventPtr& e) {
  if (const auto* n = std::get_if<Not>(&e->node)) return n->inner;
  return Event::negate(e);
}

}  // namespace

EventPtr Event::disj(EventPtr lhs, EventPtr rhs) {
  return negate(conj(strip_or_negate(lhs), strip_or_negate(rhs)));
}

bool operator==(const Event& a, const Event& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, VarEq>) {
          return x.var == y.var && x.value == y.value;
        } else if constexpr (std::is_same_v<T, Flip>) {
          return x.prob == y.prob;
        } else if constexpr (std::is_same_v<T, Not>) {
          return *x.inner == *y.inner;
        } else {
          return *x.lhs == *y.lhs && *x.rhs == *y.rhs;
        }
      },
      a.node);
}

StmtPtr Statement::skip() {
  static const StmtPtr instance = std::make_shared<const Statement>(Statement{Skip{}});
  return instance;
}

StmtPtr Statement::seq(StmtPtr first, StmtPtr second) {
  return std::make_shared<const Statement>(Statement{Seq{std::move(first), std::move(second)}});
}

StmtPtr Statement::set_zero(std::size_t var) {
  return std::make_shared<const Statement>(Statement{SetZero{var}});
}

StmtPtr Statement::add_const(std::size_t var, std::uint64_t amount) {
  return std::make_shared<const Statement>(Statement{AddConst{var, amount}});
}

StmtPtr Statement::dec(std::size_t var) {
  return std::make_shared<const Statement>(Statement{DecClamped{var}});
}

StmtPtr Statement::ite(EventPtr cond, StmtPtr then_branch, StmtPtr else_branch) {
  return std::make_shared<const Statement>(
      Statement{IfThenElse{std::move(cond), std::move(then_branch), std::move(else_branch)}});
}

StmtPtr Statement::loop(EventPtr cond, StmtPtr body, std::size_t loop_id) {
  return std::make_shared<const Statement>(Statement{While{std::move(cond), std::move(body), loop_id}});
}

StmtPtr Statement::fail() {
  static const StmtPtr instance = std::make_shared<const Statement>(Statement{Fail{}});
  return instance;
}

bool operator==(const Statement& a, const Statement& b) {
  if (&a == &b) return true;
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Skip> || std::is_same_v<T, Fail>) {
          return true;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return *x.first == *y.first && *x.second == *y.second;
        } else if constexpr (std::is_same_v<T, SetZero> || std::is_same_v<T, DecClamped>) {
          return x.var == y.var;
        } else if constexpr (std::is_same_v<T, AddConst>) {
          return x.var == y.var && x.amount == y.amount;
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          return *x.cond == *y.cond && *x.then_branch == *y.then_branch &&
                 *x.else_branch == *y.else_branch;
        } else {
          return x.loop_id == y.loop_id && *x.cond == *y.cond && *x.body == *y.body;
        }
      },
      a.node);
}

std::size_t CoreProgram::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < var_names.size(); ++i) {
    if (var_names[i] == name) return i;
  }
  throw std::out_of_range("unknown variable: " + std::string(name));
}

bool operator==(const CoreProgram& a, const CoreProgram& b) {
  return a.var_count == b.var_count && a.var_names == b.var_names && *a.body == *b.body;
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

void collect_loops(const StmtPtr& stmt, std::unordered_set<const Statement*>& seen) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Seq>) {
          collect_loops(s.first, seen);
          collect_loops(s.second, seen);
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          collect_loops(s.then_branch, seen);
          collect_loops(s.else_branch, seen);
        } else if constexpr (std::is_same_v<T, While>) {
          if (seen.insert(stmt.get()).second) collect_loops(s.body, seen);
        }
      },
      stmt->node);
}

}  // namespace

std::size_t count_loops(const StmtPtr& stmt) {
  std::unordered_set<const Statement*> seen;
  collect_loops(stmt, seen);
  return seen.size();
}

bool is_loop_free(const StmtPtr& stmt) { return count_loops(stmt) == 0; }

}  // namespace geobound
