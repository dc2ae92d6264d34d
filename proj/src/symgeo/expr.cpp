#include "geobound/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace geobound {
namespace {

std::uint64_t pack(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

int binary_slot(ExprOp op) {
  switch (op) {
    case ExprOp::Add: return 0;
    case ExprOp::Mul: return 1;
    case ExprOp::Div: return 2;
    default: return 3;
  }
}

template <class F>
void visit_reachable(const ExprPool& pool, ExprId root, std::vector<char>& seen, F&& f) {
  std::vector<ExprId> stack{root};
  while (!stack.empty()) {
    const ExprId id = stack.back();
    stack.pop_back();
    if (seen[id]) continue;
    seen[id] = 1;
    f(id);
    const ExprNode& n = pool.node(id);
    if (n.op != ExprOp::Const && n.op != ExprOp::Var) {
      stack.push_back(n.a);
      stack.push_back(n.b);
    }
  }
}

}  // namespace

ExprPool::ExprPool() {
  constant(Rational(0));
  constant(Rational(1));
}

ExprId ExprPool::intern(ExprOp op, std::uint32_t a, std::uint32_t b) {
  auto& index = binary_index_[binary_slot(op)];
  const auto key = pack(a, b);
  if (auto it = index.find(key); it != index.end()) return it->second;
  const auto id = static_cast<ExprId>(nodes_.size());
  nodes_.push_back({op, a, b});
  index.emplace(key, id);
  return id;
}

ExprId ExprPool::constant(const Rational& value) {
  if (auto it = const_index_.find(value); it != const_index_.end()) return it->second;
  const auto id = static_cast<ExprId>(nodes_.size());
  nodes_.push_back({ExprOp::Const, static_cast<std::uint32_t>(constants_.size()), 0});
  constants_.push_back(value);
  const_index_.emplace(value, id);
  return id;
}

ExprId ExprPool::var(std::uint32_t index) {
  if (auto it = var_index_.find(index); it != var_index_.end()) return it->second;
  const auto id = static_cast<ExprId>(nodes_.size());
  nodes_.push_back({ExprOp::Var, index, 0});
  var_index_.emplace(index, id);
  return id;
}

std::pair<Rational, ExprId> ExprPool::split_coefficient(ExprId id) const {
  const ExprNode& n = nodes_[id];
  if (n.op == ExprOp::Const) return {const_value(id), kOne};
  if (n.op == ExprOp::Mul && is_const(n.a)) return {const_value(n.a), n.b};
  return {Rational(1), id};
}

ExprId ExprPool::add(ExprId a, ExprId b) {
  if (a == kZero) return b;
  if (b == kZero) return a;
  if (is_const(a) && is_const(b)) return constant(const_value(a) + const_value(b));
  const auto [ca, ra] = split_coefficient(a);
  const auto [cb, rb] = split_coefficient(b);
  if (ra == rb && ra != kOne) return mul(constant(ca + cb), ra);
  if (a > b) std::swap(a, b);
  return intern(ExprOp::Add, a, b);
}

ExprId ExprPool::mul(ExprId a, ExprId b) {
  if (a == kZero || b == kZero) return kZero;
  if (a == kOne) return b;
  if (b == kOne) return a;
  if (is_const(a) && is_const(b)) return constant(const_value(a) * const_value(b));
  if (is_const(b)) std::swap(a, b);
  if (is_const(a)) {
    const ExprNode& nb = nodes_[b];
    if (nb.op == ExprOp::Mul && is_const(nb.a)) return mul(constant(const_value(a) * const_value(nb.a)), nb.b);
    return intern(ExprOp::Mul, a, b);
  }
  const auto [ca, ra] = split_coefficient(a);
  const auto [cb, rb] = split_coefficient(b);
  if (ca != 1 || cb != 1) return mul(constant(ca * cb), mul(ra, rb));
  if (nodes_[a].op == ExprOp::Div) return div(mul(nodes_[a].a, b), nodes_[a].b);
  if (nodes_[b].op == ExprOp::Div) return div(mul(a, nodes_[b].a), nodes_[b].b);
  // Flattened, sorted factor chain.
  std::vector<ExprId> factors;
  const auto collect = [&](ExprId x, auto&& self) -> void {
    if (nodes_[x].op == ExprOp::Mul) {
      self(nodes_[x].a, self);
      self(nodes_[x].b, self);
    } else {
      factors.push_back(x);
    }
  };
  collect(a, collect);
  collect(b, collect);
  std::sort(factors.begin(), factors.end());
  ExprId acc = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) acc = intern(ExprOp::Mul, acc, factors[i]);
  return acc;
}

ExprId ExprPool::div(ExprId a, ExprId b) {
  if (is_const(b)) {
    if (const_value(b) == 0) throw std::domain_error("division by zero constant");
    return mul(constant(1 / const_value(b)), a);
  }
  if (a == kZero) return kZero;
  if (a == b) return kOne;
  const auto [ca, ra] = split_coefficient(a);
  if (ca != 1) return mul(constant(ca), div(ra, b));
  if (nodes_[a].op == ExprOp::Div) return div(nodes_[a].a, mul(nodes_[a].b, b));
  return intern(ExprOp::Div, a, b);
}

ExprId ExprPool::nsub(ExprId a, ExprId b) {
  if (b == kZero) return a;
  if (a == b) return kZero;
  if (is_const(a) && is_const(b) && const_value(a) >= const_value(b)) {
    return constant(const_value(a) - const_value(b));
  }
  const auto [ca, ra] = split_coefficient(a);
  const auto [cb, rb] = split_coefficient(b);
  if (ra == rb && ra != kOne && ca >= cb) return mul(constant(ca - cb), ra);
  return intern(ExprOp::NSub, a, b);
}

ExprId ExprPool::substitute(ExprId root, const std::function<std::optional<ExprId>(std::uint32_t)>& f,
                            std::unordered_map<ExprId, ExprId>& memo) {
  if (auto it = memo.find(root); it != memo.end()) return it->second;
  const ExprNode n = nodes_[root];
  ExprId out = root;
  switch (n.op) {
    case ExprOp::Const:
      break;
    case ExprOp::Var:
      if (auto r = f(n.a)) out = *r;
      break;
    default: {
      const ExprId l = substitute(n.a, f, memo);
      const ExprId r = substitute(n.b, f, memo);
      if (l == n.a && r == n.b) break;
      switch (n.op) {
        case ExprOp::Add: out = add(l, r); break;
        case ExprOp::Mul: out = mul(l, r); break;
        case ExprOp::Div: out = div(l, r); break;
        default: out = nsub(l, r); break;
      }
    }
  }
  memo.emplace(root, out);
  return out;
}

std::string ExprPool::to_string(ExprId id, const std::function<std::string(std::uint32_t)>& names) const {
  const ExprNode& n = nodes_[id];
  switch (n.op) {
    case ExprOp::Const: return geobound::to_string(const_value(id));
    case ExprOp::Var: return names(n.a);
    case ExprOp::Add: return "(" + to_string(n.a, names) + " + " + to_string(n.b, names) + ")";
    case ExprOp::Mul: return to_string(n.a, names) + "*" + to_string(n.b, names);
    case ExprOp::Div: return to_string(n.a, names) + "/(" + to_string(n.b, names) + ")";
    case ExprOp::NSub: return "(" + to_string(n.a, names) + " - " + to_string(n.b, names) + ")";
  }
  return "?";
}

std::vector<std::uint32_t> free_vars(const ExprPool& pool, ExprId root) {
  std::vector<char> seen(pool.size(), 0);
  std::vector<std::uint32_t> out;
  visit_reachable(pool, root, seen, [&](ExprId id) {
    if (pool.is_var(id)) out.push_back(pool.node(id).a);
  });
  std::sort(out.begin(), out.end());
  return out;
}

Rational eval_exact(const ExprPool& pool, ExprId root, std::span<const Rational> values) {
  std::vector<char> seen(pool.size(), 0);
  std::vector<ExprId> order;
  visit_reachable(pool, root, seen, [&](ExprId id) { order.push_back(id); });
  std::sort(order.begin(), order.end());
  std::unordered_map<ExprId, Rational> val;
  val.reserve(order.size());
  for (ExprId id : order) {
    const ExprNode& n = pool.node(id);
    switch (n.op) {
      case ExprOp::Const: val[id] = pool.const_value(id); break;
      case ExprOp::Var: val[id] = values[n.a]; break;
      case ExprOp::Add: val[id] = val[n.a] + val[n.b]; break;
      case ExprOp::Mul: val[id] = val[n.a] * val[n.b]; break;
      case ExprOp::Div:
        if (val[n.b] == 0) throw std::domain_error("division by zero");
        val[id] = val[n.a] / val[n.b];
        break;
      case ExprOp::NSub: val[id] = val[n.a] - val[n.b]; break;
    }
  }
  return val[root];
}

std::optional<LinearForm> linear_form(const ExprPool& pool, ExprId root) {
  std::vector<char> seen(pool.size(), 0);
  std::vector<ExprId> order;
  visit_reachable(pool, root, seen, [&](ExprId id) { order.push_back(id); });
  std::sort(order.begin(), order.end());
  std::unordered_map<ExprId, LinearForm> form;
  const auto is_constant = [](const LinearForm& f) { return f.coeffs.empty(); };
  const auto scaled = [](LinearForm f, const Rational& k) {
    f.constant *= k;
    for (auto it = f.coeffs.begin(); it != f.coeffs.end();) {
      it->second *= k;
      it = it->second == 0 ? f.coeffs.erase(it) : std::next(it);
    }
    return f;
  };
  const auto combined = [](LinearForm f, const LinearForm& g, const Rational& k) {
    f.constant += k * g.constant;
    for (const auto& [v, c] : g.coeffs) {
      Rational& slot = f.coeffs[v];
      slot += k * c;
      if (slot == 0) f.coeffs.erase(v);
    }
    return f;
  };
  for (ExprId id : order) {
    const ExprNode& n = pool.node(id);
    LinearForm f;
    switch (n.op) {
      case ExprOp::Const:
        f.constant = pool.const_value(id);
        break;
      case ExprOp::Var:
        f.coeffs[n.a] = 1;
        break;
      case ExprOp::Add:
        f = combined(form[n.a], form[n.b], 1);
        break;
      case ExprOp::NSub:
        f = combined(form[n.a], form[n.b], -1);
        break;
      case ExprOp::Mul: {
        const LinearForm& l = form[n.a];
        const LinearForm& r = form[n.b];
        if (is_constant(l)) f = scaled(r, l.constant);
        else if (is_constant(r)) f = scaled(l, r.constant);
        else return std::nullopt;
        break;
      }
      case ExprOp::Div: {
        const LinearForm& r = form[n.b];
        if (!is_constant(r) || r.constant == 0) return std::nullopt;
        f = scaled(form[n.a], 1 / r.constant);
        break;
      }
    }
    form[id] = std::move(f);
  }
  return form[root];
}

DagEvaluator::DagEvaluator(const ExprPool& pool, std::vector<ExprId> roots) : pool_(pool), roots_(std::move(roots)) {
  std::vector<char> seen(pool.size(), 0);
  for (ExprId r : roots_) visit_reachable(pool, r, seen, [&](ExprId id) { order_.push_back(id); });
  std::sort(order_.begin(), order_.end());
  for (std::uint32_t i = 0; i < order_.size(); ++i) slot_[order_[i]] = i;
  values_.assign(order_.size(), 0.0);
  adjoint_.assign(order_.size(), 0.0);
  root_slots_.resize(roots_.size());
  for (std::size_t r = 0; r < roots_.size(); ++r) {
    std::vector<char> mine(pool.size(), 0);
    auto& slots = root_slots_[r];
    visit_reachable(pool, roots_[r], mine, [&](ExprId id) { slots.push_back(slot_[id]); });
    std::sort(slots.begin(), slots.end());
  }
}

void DagEvaluator::forward(std::span<const double> vars) {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const ExprNode& n = pool_.node(order_[i]);
    double v = 0;
    switch (n.op) {
      case ExprOp::Const: v = pool_.const_value(order_[i]).get_d(); break;
      case ExprOp::Var: v = vars[n.a]; break;
      case ExprOp::Add: v = values_[slot_[n.a]] + values_[slot_[n.b]]; break;
      case ExprOp::Mul: v = values_[slot_[n.a]] * values_[slot_[n.b]]; break;
      case ExprOp::Div: v = values_[slot_[n.a]] / values_[slot_[n.b]]; break;
      case ExprOp::NSub: v = std::max(0.0, values_[slot_[n.a]] - values_[slot_[n.b]]); break;
    }
    values_[i] = v;
  }
}

double DagEvaluator::value(std::size_t root) const { return values_[slot_.at(roots_[root])]; }

void DagEvaluator::backward(std::size_t root, double scale, std::span<double> grad) {
  const auto& slots = root_slots_[root];
  for (auto s : slots) adjoint_[s] = 0.0;
  adjoint_[slot_[roots_[root]]] = scale;
  for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
    const std::uint32_t s = *it;
    const double adj = adjoint_[s];
    if (adj == 0.0) continue;
    const ExprNode& n = pool_.node(order_[s]);
    switch (n.op) {
      case ExprOp::Const: break;
      case ExprOp::Var: grad[n.a] += adj; break;
      case ExprOp::Add:
        adjoint_[slot_[n.a]] += adj;
        adjoint_[slot_[n.b]] += adj;
        break;
      case ExprOp::Mul:
        adjoint_[slot_[n.a]] += adj * values_[slot_[n.b]];
        adjoint_[slot_[n.b]] += adj * values_[slot_[n.a]];
        break;
      case ExprOp::Div: {
        const double d = values_[slot_[n.b]];
        adjoint_[slot_[n.a]] += adj / d;
        adjoint_[slot_[n.b]] -= adj * values_[slot_[n.a]] / (d * d);
        break;
      }
      case ExprOp::NSub:
        if (values_[slot_[n.a]] - values_[slot_[n.b]] > 0) {
          adjoint_[slot_[n.a]] += adj;
          adjoint_[slot_[n.b]] -= adj;
        }
        break;
    }
  }
}

}  // namespace geobound
