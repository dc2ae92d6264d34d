#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geobound/rational.hpp"

namespace geobound {

// Variables are stored 0-based internally; surface names live in CoreProgram.

struct Event;
using EventPtr = std::shared_ptr<const Event>;

struct VarEq {
  std::size_t var;
  std::uint64_t value;
};
struct Flip {
  Rational prob;
};
struct Not {
  EventPtr inner;
};
struct And {
  EventPtr lhs;
  EventPtr rhs;
};

struct Event {
  std::variant<VarEq, Flip, Not, And> node;

  static EventPtr var_eq(std::size_t var, std::uint64_t value);
  static EventPtr flip(Rational prob);
  static EventPtr negate(EventPtr inner);
  static EventPtr conj(EventPtr lhs, EventPtr rhs);
  /// E1 || E2 as !(!E1 && !E2); a double negation produced by the rewrite is
  /// collapsed so chains of disjunctions stay flat.
  static EventPtr disj(EventPtr lhs, EventPtr rhs);
};

bool operator==(const Event& a, const Event& b);

struct Statement;
using StmtPtr = std::shared_ptr<const Statement>;

struct Skip {};
struct Seq {
  StmtPtr first;
  StmtPtr second;
};
struct SetZero {
  std::size_t var;
};
struct AddConst {
  std::size_t var;
  std::uint64_t amount;
};
struct DecClamped {
  std::size_t var;
};
struct IfThenElse {
  EventPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;
};
struct While {
  EventPtr cond;
  StmtPtr body;
  /// Identifies the loop of the source program this node stems from; kept
  /// by unrolling so every copy maps back to its origin.
  std::size_t loop_id;
};
struct Fail {};

struct Statement {
  std::variant<Skip, Seq, SetZero, AddConst, DecClamped, IfThenElse, While, Fail> node;

  static StmtPtr skip();
  static StmtPtr seq(StmtPtr first, StmtPtr second);
  static StmtPtr set_zero(std::size_t var);
  static StmtPtr add_const(std::size_t var, std::uint64_t amount);
  static StmtPtr dec(std::size_t var);
  static StmtPtr ite(EventPtr cond, StmtPtr then_branch, StmtPtr else_branch);
  static StmtPtr loop(EventPtr cond, StmtPtr body, std::size_t loop_id);
  static StmtPtr fail();
};

bool operator==(const Statement& a, const Statement& b);

struct CoreProgram {
  std::size_t var_count = 1;
  StmtPtr body;
  std::vector<std::string> var_names;
  std::size_t loop_count = 0;

  /// Index of a surface name; throws std::out_of_range if absent.
  std::size_t var_index(std::string_view name) const;
};

bool operator==(const CoreProgram& a, const CoreProgram& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses surface syntax and eliminates all sugar.
CoreProgram parse(std::string_view source);

/// Parses a single event against the variables of `program` (test helper and
/// CLI convenience). Unknown names are rejected.
EventPtr parse_event(std::string_view source, const CoreProgram& program);

/// Core-syntax rendering; `parse(print(p))` reproduces p.
std::string print(const CoreProgram& program);
std::string print(const Event& event, const std::vector<std::string>& names);

/// Replaces every loop by u guarded copies of its body followed by the loop
/// itself. Loop bodies are unrolled recursively first.
CoreProgram unroll(const CoreProgram& program, std::size_t u);
StmtPtr unroll(const StmtPtr& stmt, std::size_t u);

/// Number of distinct While nodes; unrolled copies share their loop body.
std::size_t count_loops(const StmtPtr& stmt);
bool is_loop_free(const StmtPtr& stmt);

}  // namespace geobound
