#include "geobound/symgeo.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "geobound/support.hpp"

namespace geobound {

std::uint32_t ConstraintSystem::add_var(VarKind kind, std::size_t loop_id, std::size_t dim) {
  const std::size_t same = kind_count[static_cast<int>(kind)]++;
  const char prefix = kind == VarKind::BlockEntry ? 'b' : kind == VarKind::DecayRate ? 'a' : 'c';
  vars.push_back({prefix + std::to_string(same), kind, loop_id, dim});
  parent.push_back(static_cast<std::uint32_t>(parent.size()));
  return static_cast<std::uint32_t>(vars.size() - 1);
}

std::uint32_t ConstraintSystem::find(std::uint32_t v) const {
  while (parent[v] != v) v = parent[v];
  return v;
}

std::vector<std::uint32_t> ConstraintSystem::live_vars() const {
  std::set<std::uint32_t> out;
  const auto collect = [&](ExprId e) {
    for (auto v : free_vars(*pool, e)) out.insert(find(v));
  };
  for (const auto& c : constraints) {
    collect(c.lhs);
    collect(c.rhs);
  }
  if (objective) collect(*objective);
  return {out.begin(), out.end()};
}

SymEgd to_symbolic(ExprPool& pool, const Egd& g) {
  SymEgd out;
  out.block = Tensor<ExprId>(g.block.shape());
  for (std::size_t i = 0; i < g.block.size(); ++i) out.block.flat(i) = pool.constant(g.block.flat(i));
  for (const auto& d : g.decay) out.decay.push_back(pool.constant(d));
  return out;
}

SymEgd sym_restrict(ExprPool& pool, const SymEgd& g, const Event& e) {
  ExprOps ops{&pool};
  return egd_ops::restrict(ops, g, e);
}

namespace {

class Generator {
 public:
  Generator(ConstraintSystem& sys, const GenOptions& opts, const NonlinearFix* fix)
      : sys_(sys), pool_(*sys.pool), ops_{&pool_}, opts_(opts), fix_(fix) {}

  std::pair<SymEgd, Support> run(const StmtPtr& stmt, const SymEgd& g, const Support& s) {
    if (opts_.deadline) opts_.deadline->check();
    if (!s) return {egd_ops::fail(ops_, g.dims()), std::nullopt};
    return std::visit(
        [&](const auto& n) -> std::pair<SymEgd, Support> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            return {g, s};
          } else if constexpr (std::is_same_v<T, Seq>) {
            auto [g1, s1] = run(n.first, g, s);
            return run(n.second, g1, s1);
          } else if constexpr (std::is_same_v<T, SetZero>) {
            return {egd_ops::set_zero(ops_, g, n.var), support_post(stmt, s)};
          } else if constexpr (std::is_same_v<T, AddConst>) {
            return {egd_ops::add_const(ops_, g, n.var, n.amount), support_post(stmt, s)};
          } else if constexpr (std::is_same_v<T, DecClamped>) {
            return {egd_ops::dec(ops_, g, n.var), support_post(stmt, s)};
          } else if constexpr (std::is_same_v<T, Fail>) {
            return {egd_ops::fail(ops_, g.dims()), std::nullopt};
          } else if constexpr (std::is_same_v<T, IfThenElse>) {
            const EventPtr neg = Event::negate(n.cond);
            auto [a, sa] = run(n.then_branch, egd_ops::restrict(ops_, g, *n.cond), refine(s, *n.cond, true));
            auto [b, sb] = run(n.else_branch, egd_ops::restrict(ops_, g, *neg), refine(s, *n.cond, false));
            return {join(a, b), support_join(sa, sb)};
          } else {
            return loop(n, g, s);
          }
        },
        stmt->node);
  }

  void emit(ExprId lhs, ExprId rhs) {
    if (lhs == ExprPool::kZero || lhs == rhs) return;
    if (pool_.is_const(lhs) && pool_.is_const(rhs) && pool_.const_value(lhs) <= pool_.const_value(rhs)) return;
    if (seen_.insert({lhs, rhs}).second) sys_.constraints.push_back({lhs, rhs});
  }

  void unify(std::uint32_t a, std::uint32_t b) {
    a = sys_.find(a);
    b = sys_.find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    sys_.parent[b] = a;
  }

 private:
  ExprId join_decay(ExprId a, ExprId b) {
    if (a == b) return a;
    const bool ca = pool_.is_const(a);
    const bool cb = pool_.is_const(b);
    if (ca && cb) return pool_.const_value(a) >= pool_.const_value(b) ? a : b;
    if (opts_.use_strict_join) {
      if (ca && pool_.const_value(a) == 0) return b;
      if (cb && pool_.const_value(b) == 0) return a;
      if (ca) {
        emit(a, b);
        return b;
      }
      if (cb) {
        emit(b, a);
        return a;
      }
      const auto va = pool_.node(a).a;
      const auto vb = pool_.node(b).a;
      unify(va, vb);
      return pool_.var(sys_.find(va));
    }
    const ExprId beta = sys_.var_expr(sys_.add_var(VarKind::DecayRate, kNoLoop, 0));
    emit(a, beta);
    emit(b, beta);
    return beta;
  }

  SymEgd join(const SymEgd& a, const SymEgd& b) {
    return egd_ops::join(ops_, a, b, [&](ExprId x, ExprId y) { return join_decay(x, y); });
  }

  // Drops the part of g outside the box; sound because the measure it bounds
  // lives inside the box.
  SymEgd clip(const SymEgd& g, const RangeBox& box) {
    Shape shape = g.block.shape();
    SymEgd out;
    out.decay = g.decay;
    for (std::size_t k = 0; k < shape.size(); ++k) {
      const Range& r = box[k];
      if (r.hi) {
        shape[k] = static_cast<std::size_t>(*r.hi) + 1;
        out.decay[k] = ExprPool::kZero;
      } else {
        shape[k] = std::max<std::size_t>(shape[k], static_cast<std::size_t>(r.lo) + 1);
      }
    }
    out.block = egd_ops::build<ExprId>(shape, [&](const Index& idx) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < box[k].lo) return ExprPool::kZero;
      }
      return egd_ops::entry_at(ops_, g, idx);
    });
    return out;
  }

  ExprId decay_for(std::size_t loop_id, std::size_t dim) {
    if (fix_) {
      auto it = fix_->decay.find({loop_id, dim});
      if (it == fix_->decay.end()) throw std::invalid_argument("nonlinear fix misses a decay rate");
      return pool_.constant(it->second);
    }
    return sys_.var_expr(sys_.add_var(VarKind::DecayRate, loop_id, dim));
  }

  ExprId contraction_for(std::size_t loop_id) {
    if (fix_) {
      auto it = fix_->contraction.find(loop_id);
      if (it == fix_->contraction.end()) throw std::invalid_argument("nonlinear fix misses a contraction factor");
      return pool_.constant(it->second);
    }
    return sys_.var_expr(sys_.add_var(VarKind::ContractionFactor, loop_id, 0));
  }

  std::pair<SymEgd, Support> loop(const While& w, const SymEgd& g, const Support& s) {
    const Support head = loop_head(w, s);
    if (!head) return {egd_ops::fail(ops_, g.dims()), std::nullopt};
    const RangeBox& box = *head;

    SymEgd r;
    Shape shape(g.dims());
    r.decay.resize(g.dims());
    for (std::size_t k = 0; k < shape.size(); ++k) {
      if (box[k].hi) {
        shape[k] = static_cast<std::size_t>(*box[k].hi) + 1;
        r.decay[k] = ExprPool::kZero;
      } else {
        shape[k] = static_cast<std::size_t>(box[k].lo) + opts_.invariant_size;
        r.decay[k] = decay_for(w.loop_id, k);
      }
    }
    r.block = egd_ops::build<ExprId>(shape, [&](const Index& idx) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < box[k].lo) return ExprPool::kZero;
      }
      return sys_.var_expr(sys_.add_var(VarKind::BlockEntry, w.loop_id, 0));
    });
    const ExprId c = contraction_for(w.loop_id);

    egd_ops::for_each_le(ops_, clip(g, box), r, [&](ExprId a, ExprId b) { emit(a, b); });

    const Support inside = refine(head, *w.cond, true);
    auto [body_out, body_support] = run(w.body, egd_ops::restrict(ops_, r, *w.cond), inside);
    (void)body_support;
    if (inside) {
      egd_ops::for_each_le(ops_, clip(body_out, box), egd_ops::scale(ops_, r, c), [&](ExprId a, ExprId b) { emit(a, b); });
    }

    SymEgd total = r;
    const ExprId denom = pool_.one_minus(c);
    for (auto& v : total.block.data()) v = pool_.div(v, denom);
    const EventPtr exit = Event::negate(w.cond);
    return {egd_ops::restrict(ops_, total, *exit), refine(head, *w.cond, false)};
  }

  static constexpr std::size_t kNoLoop = static_cast<std::size_t>(-1);

  ConstraintSystem& sys_;
  ExprPool& pool_;
  ExprOps ops_;
  const GenOptions& opts_;
  const NonlinearFix* fix_;
  std::set<std::pair<ExprId, ExprId>> seen_;
};

Support initial_support(const Egd& init) {
  RangeBox box;
  for (std::size_t k = 0; k < init.dims(); ++k) {
    std::optional<std::uint64_t> hi;
    if (init.decay[k] == 0) hi = init.block.extent(k) - 1;
    box.push_back({0, hi});
  }
  return box;
}

// Rewrites everything onto representative variables and drops constraints
// that became trivial.
void canonicalize(ConstraintSystem& sys, SymEgd* output) {
  ExprPool& pool = *sys.pool;
  std::unordered_map<ExprId, ExprId> memo;
  const auto rep = [&](std::uint32_t v) -> std::optional<ExprId> {
    const auto r = sys.find(v);
    if (r == v) return std::nullopt;
    return pool.var(r);
  };
  const auto sub = [&](ExprId e) { return pool.substitute(e, rep, memo); };
  std::vector<Constraint> kept;
  std::set<std::pair<ExprId, ExprId>> seen;
  for (const auto& c : sys.constraints) {
    const ExprId lhs = sub(c.lhs);
    const ExprId rhs = sub(c.rhs);
    if (lhs == ExprPool::kZero || lhs == rhs) continue;
    if (pool.is_const(lhs) && pool.is_const(rhs) && pool.const_value(lhs) <= pool.const_value(rhs)) continue;
    if (seen.insert({lhs, rhs}).second) kept.push_back({lhs, rhs});
  }
  sys.constraints = std::move(kept);
  if (sys.objective) sys.objective = sub(*sys.objective);
  if (output) {
    for (auto& v : output->block.data()) v = sub(v);
    for (auto& v : output->decay) v = sub(v);
  }
}

ExprId objective_expr(ExprPool& pool, const SymEgd& out, const Objective& obj) {
  ExprOps ops{&pool};
  switch (obj.kind) {
    case Objective::Kind::TotalMass:
      return egd_ops::total_mass(ops, out);
    case Objective::Kind::ExpectedValue:
      return egd_ops::moment(ops, egd_ops::marginal_of(ops, out, obj.var), 1);
    case Objective::Kind::TailDecay:
      return out.decay[obj.var];
  }
  return ExprPool::kZero;
}

}  // namespace

GeneratedSystem generate_system(const CoreProgram& p, const Egd& init, const GenOptions& opts,
                                const NonlinearFix* fix) {
  if (opts.invariant_size < 1) throw std::invalid_argument("invariant size must be at least 1");
  if (init.dims() != p.var_count) throw std::invalid_argument("initial EGD has the wrong dimension");
  GeneratedSystem out;
  ConstraintSystem& sys = out.system;
  Generator gen(sys, opts, fix);
  const CoreProgram unrolled = unroll(p, opts.unroll);
  auto [result, support] = gen.run(unrolled.body, to_symbolic(*sys.pool, init), initial_support(init));
  (void)support;
  out.output = std::move(result);
  if (opts.objective.kind != Objective::Kind::TotalMass && opts.objective.var >= p.var_count) {
    throw std::invalid_argument("objective variable out of range");
  }
  canonicalize(sys, &out.output);
  sys.objective = objective_expr(*sys.pool, out.output, opts.objective);
  return out;
}

ConstraintSystem unify_cyclic_decays(ConstraintSystem sys) {
  const std::size_t n = sys.vars.size();
  std::vector<std::vector<std::uint32_t>> edges(n);
  const ExprPool& pool = *sys.pool;
  const auto decay_var = [&](ExprId e) -> std::optional<std::uint32_t> {
    if (!pool.is_var(e)) return std::nullopt;
    const auto v = sys.find(pool.node(e).a);
    if (sys.vars[v].kind != VarKind::DecayRate) return std::nullopt;
    return v;
  };
  for (const auto& c : sys.constraints) {
    auto a = decay_var(c.lhs);
    auto b = decay_var(c.rhs);
    if (a && b) edges[*a].push_back(*b);
  }
  // Tarjan
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  int counter = 0;
  std::vector<std::vector<std::uint32_t>> components;
  std::function<void(std::uint32_t)> strong = [&](std::uint32_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (auto w : edges[v]) {
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::uint32_t> comp;
      std::uint32_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1) components.push_back(std::move(comp));
    }
  };
  for (std::uint32_t v = 0; v < n; ++v) {
    if (index[v] < 0 && !edges[v].empty()) strong(v);
  }
  if (components.empty()) return sys;
  for (const auto& comp : components) {
    const auto root = *std::min_element(comp.begin(), comp.end());
    for (auto v : comp) sys.parent[v] = root;
  }
  canonicalize(sys, nullptr);
  return sys;
}

GeneratedSystem relinearize(const CoreProgram& p, const Egd& init, const GenOptions& opts, const NonlinearFix& fix) {
  GeneratedSystem out = generate_system(p, init, opts, &fix);
  for (const auto& c : out.system.constraints) {
    if (!linear_form(*out.system.pool, c.lhs) || !linear_form(*out.system.pool, c.rhs)) {
      throw std::logic_error("relinearized constraint is not affine");
    }
  }
  return out;
}

NonlinearFix extract_fix(const ConstraintSystem& sys, std::span<const Rational> values) {
  NonlinearFix fix;
  for (std::uint32_t v = 0; v < sys.vars.size(); ++v) {
    const SymVar& var = sys.vars[v];
    const Rational& value = values[sys.find(v)];
    if (var.kind == VarKind::DecayRate) fix.decay[{var.loop_id, var.dim}] = value;
    else if (var.kind == VarKind::ContractionFactor) fix.contraction[var.loop_id] = value;
  }
  return fix;
}

std::vector<Rational> evaluate_many(const ExprPool& pool, std::span<const ExprId> roots, std::span<const Rational> values) {
  ExprId top = 0;
  for (auto r : roots) top = std::max(top, r);
  std::vector<char> need(static_cast<std::size_t>(top) + 1, 0);
  for (auto r : roots) need[r] = 1;
  for (ExprId id = top + 1; id-- > 0;) {
    if (!need[id]) continue;
    const ExprNode& n = pool.node(id);
    if (n.op != ExprOp::Const && n.op != ExprOp::Var) need[n.a] = need[n.b] = 1;
  }
  std::vector<Rational> val(need.size());
  for (ExprId id = 0; id <= top; ++id) {
    if (!need[id]) continue;
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
  std::vector<Rational> out;
  out.reserve(roots.size());
  for (auto r : roots) out.push_back(val[r]);
  return out;
}

Egd evaluate(const ExprPool& pool, const SymEgd& g, std::span<const Rational> values) {
  std::vector<ExprId> roots(g.block.data().begin(), g.block.data().end());
  roots.insert(roots.end(), g.decay.begin(), g.decay.end());
  const auto vals = evaluate_many(pool, roots, values);
  Egd out;
  out.block = Tensor<Rational>(g.block.shape());
  for (std::size_t i = 0; i < g.block.size(); ++i) out.block.flat(i) = vals[i];
  out.decay.assign(vals.begin() + static_cast<long>(g.block.size()), vals.end());
  return out;
}

std::string dump(const ConstraintSystem& sys) {
  const auto name = [&](std::uint32_t v) { return sys.vars[sys.find(v)].name; };
  std::ostringstream os;
  os << "vars:";
  for (auto v : sys.live_vars()) os << ' ' << sys.vars[v].name;
  os << '\n';
  if (sys.objective) os << "minimize " << sys.pool->to_string(*sys.objective, name) << '\n';
  for (const auto& c : sys.constraints) {
    os << sys.pool->to_string(c.lhs, name) << " <= " << sys.pool->to_string(c.rhs, name) << '\n';
  }
  return os.str();
}

}  // namespace geobound
