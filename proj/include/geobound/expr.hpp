#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geobound/rational.hpp"

namespace geobound {

/// Node handle in an ExprPool. Children always have smaller ids than their
/// parents, so increasing id order is a topological order.
using ExprId = std::uint32_t;

enum class ExprOp : std::uint8_t { Const, Var, Add, Mul, Div, NSub };

struct ExprNode {
  ExprOp op;
  std::uint32_t a = 0;  // Const: constant slot; Var: variable index; else left child
  std::uint32_t b = 0;  // right child
};

/// Hash-consed arena of nonnegative rational-function expressions.
/// NSub(a, b) is a - b where the construction guarantees a >= b.
class ExprPool {
 public:
  static constexpr ExprId kZero = 0;
  static constexpr ExprId kOne = 1;

  ExprPool();

  ExprId constant(const Rational& value);
  ExprId var(std::uint32_t index);
  ExprId add(ExprId a, ExprId b);
  ExprId mul(ExprId a, ExprId b);
  ExprId div(ExprId a, ExprId b);
  ExprId nsub(ExprId a, ExprId b);
  ExprId one_minus(ExprId a) { return nsub(kOne, a); }

  const ExprNode& node(ExprId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  bool is_const(ExprId id) const { return nodes_[id].op == ExprOp::Const; }
  bool is_var(ExprId id) const { return nodes_[id].op == ExprOp::Var; }
  const Rational& const_value(ExprId id) const { return constants_[nodes_[id].a]; }

  /// Rebuilds `root` with variables replaced where `f` yields a value.
  ExprId substitute(ExprId root, const std::function<std::optional<ExprId>(std::uint32_t)>& f,
                    std::unordered_map<ExprId, ExprId>& memo);

  /// Infix rendering; variable names come from `names`.
  std::string to_string(ExprId id, const std::function<std::string(std::uint32_t)>& names) const;

 private:
  ExprId intern(ExprOp op, std::uint32_t a, std::uint32_t b);
  std::pair<Rational, ExprId> split_coefficient(ExprId id) const;

  struct KeyHash {
    std::size_t operator()(std::uint64_t k) const { return std::hash<std::uint64_t>{}(k); }
  };
  struct RationalHash {
    std::size_t operator()(const Rational& r) const { return hash_value(r); }
  };

  std::vector<ExprNode> nodes_;
  std::vector<Rational> constants_;
  std::unordered_map<Rational, ExprId, RationalHash> const_index_;
  std::unordered_map<std::uint64_t, ExprId, KeyHash> var_index_;
  std::unordered_map<std::uint64_t, ExprId, KeyHash> binary_index_[4];
};

/// Variables occurring in the expression, sorted.
std::vector<std::uint32_t> free_vars(const ExprPool& pool, ExprId root);

/// Exact evaluation; NSub is a plain difference.
Rational eval_exact(const ExprPool& pool, ExprId root, std::span<const Rational> values);

/// a0 + sum coeff_v * x_v
struct LinearForm {
  Rational constant = 0;
  std::map<std::uint32_t, Rational> coeffs;
};

/// Exact linear form, or nullopt when the expression is not affine.
std::optional<LinearForm> linear_form(const ExprPool& pool, ExprId root);

/// Float evaluation and reverse-mode gradients for a fixed set of roots.
/// NSub clamps at zero in float mode.
class DagEvaluator {
 public:
  DagEvaluator(const ExprPool& pool, std::vector<ExprId> roots);

  /// Evaluates every node reachable from the roots.
  void forward(std::span<const double> vars);
  double value(std::size_t root) const;
  /// Adds scale * d(root)/d(var) into grad (indexed by variable).
  void backward(std::size_t root, double scale, std::span<double> grad);

  std::size_t root_count() const { return roots_.size(); }

 private:
  const ExprPool& pool_;
  std::vector<ExprId> roots_;
  std::vector<ExprId> order_;  // reachable nodes, ascending
  std::unordered_map<ExprId, std::uint32_t> slot_;
  std::vector<double> values_;
  std::vector<double> adjoint_;
  std::vector<std::vector<std::uint32_t>> root_slots_;  // per root, ascending slots
};

}  // namespace geobound
