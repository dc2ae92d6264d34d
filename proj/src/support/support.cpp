#include "geobound/support.hpp"

#include <algorithm>
#include <sstream>

namespace geobound {
namespace {

std::optional<std::uint64_t> max_hi(const std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b) {
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

Support refine_var_eq(const Support& s, const VarEq& v, bool positive) {
  if (!s) return s;
  RangeBox box = *s;
  Range& r = box[v.var];
  if (positive) {
    if (!r.contains(v.value)) return std::nullopt;
    r = {v.value, v.value};
    return box;
  }
  if (r.hi && r.lo == *r.hi) {
    if (r.lo == v.value) return std::nullopt;
    return box;
  }
  if (r.lo == v.value) r.lo += 1;
  else if (r.hi && *r.hi == v.value) *r.hi -= 1;
  return box;
}

Support shift(const Support& s, std::size_t var, auto f) {
  if (!s) return s;
  RangeBox box = *s;
  f(box[var]);
  return box;
}

struct PairState {
  Support lower;
  Support residual;
};

class PairAnalysis {
 public:
  std::map<const Statement*, Support> heads;

  Support head(const StmtPtr& node, const While& w, const Support& in) {
    Support h = loop_head(w, in);
    auto [it, fresh] = heads.emplace(node.get(), h);
    if (!fresh) it->second = support_join(it->second, h);
    record_inner(w.body, refine(h, *w.cond, true));
    return h;
  }

  // Loops nested in a body that is only analysed by support_post still get
  // their head boxes recorded.
  void record_inner(const StmtPtr& stmt, const Support& in) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Seq>) {
            record_inner(n.first, in);
            record_inner(n.second, support_post(n.first, in));
          } else if constexpr (std::is_same_v<T, IfThenElse>) {
            record_inner(n.then_branch, refine(in, *n.cond, true));
            record_inner(n.else_branch, refine(in, *n.cond, false));
          } else if constexpr (std::is_same_v<T, While>) {
            if (in) head(stmt, n, in);
          }
        },
        stmt->node);
  }

  PairState run(const StmtPtr& stmt, const PairState& in) {
    return std::visit(
        [&](const auto& n) -> PairState {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Seq>) {
            return run(n.second, run(n.first, in));
          } else if constexpr (std::is_same_v<T, IfThenElse>) {
            const PairState a = run(n.then_branch, {refine(in.lower, *n.cond, true), refine(in.residual, *n.cond, true)});
            const PairState b = run(n.else_branch, {refine(in.lower, *n.cond, false), refine(in.residual, *n.cond, false)});
            return {support_join(a.lower, b.lower), support_join(a.residual, b.residual)};
          } else if constexpr (std::is_same_v<T, While>) {
            const Support entering = support_join(in.lower, in.residual);
            if (!entering) return {std::nullopt, std::nullopt};
            const Support h = head(stmt, n, entering);
            return {std::nullopt, refine(h, *n.cond, false)};
          } else {
            return {support_post(stmt, in.lower), support_post(stmt, in.residual)};
          }
        },
        stmt->node);
  }
};

}  // namespace

Support support_point(const std::vector<std::uint64_t>& point) {
  RangeBox box;
  for (auto v : point) box.push_back({v, v});
  return box;
}

Support support_join(const Support& a, const Support& b) {
  if (!a) return b;
  if (!b) return a;
  RangeBox out(a->size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = {std::min((*a)[k].lo, (*b)[k].lo), max_hi((*a)[k].hi, (*b)[k].hi)};
  }
  return out;
}

Support support_widen(const Support& a, const Support& b) {
  if (!a) return b;
  if (!b) return a;
  RangeBox out(a->size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Range& x = (*a)[k];
    const Range& y = (*b)[k];
    out[k].lo = x.lo <= y.lo ? x.lo : 0;
    const bool grew = !x.hi ? false : (!y.hi || *y.hi > *x.hi);
    out[k].hi = grew ? std::nullopt : x.hi;
  }
  return out;
}

bool support_leq(const Support& a, const Support& b) {
  if (!a) return true;
  if (!b) return false;
  for (std::size_t k = 0; k < a->size(); ++k) {
    const Range& x = (*a)[k];
    const Range& y = (*b)[k];
    if (x.lo < y.lo) return false;
    if (y.hi && (!x.hi || *x.hi > *y.hi)) return false;
  }
  return true;
}

Support refine(const Support& s, const Event& e, bool positive) {
  if (!s) return s;
  return std::visit(
      [&](const auto& n) -> Support {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          return refine_var_eq(s, n, positive);
        } else if constexpr (std::is_same_v<T, Flip>) {
          if ((positive && n.prob == 0) || (!positive && n.prob == 1)) return std::nullopt;
          return s;
        } else if constexpr (std::is_same_v<T, Not>) {
          return refine(s, *n.inner, !positive);
        } else {
          if (positive) return refine(refine(s, *n.lhs, true), *n.rhs, true);
          return support_join(refine(s, *n.lhs, false), refine(s, *n.rhs, false));
        }
      },
      e.node);
}

Support loop_head(const While& loop, const Support& in) {
  Support x = in;
  for (int it = 0;; ++it) {
    const Support next = support_join(x, support_post(loop.body, refine(x, *loop.cond, true)));
    if (support_leq(next, x)) return x;
    x = it < kWideningDelay ? next : support_widen(x, next);
  }
}

Support support_post(const StmtPtr& stmt, const Support& in) {
  if (!in) return in;
  return std::visit(
      [&](const auto& n) -> Support {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          return in;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return support_post(n.second, support_post(n.first, in));
        } else if constexpr (std::is_same_v<T, SetZero>) {
          return shift(in, n.var, [](Range& r) { r = {0, 0}; });
        } else if constexpr (std::is_same_v<T, AddConst>) {
          return shift(in, n.var, [&](Range& r) {
            r.lo += n.amount;
            if (r.hi) *r.hi += n.amount;
          });
        } else if constexpr (std::is_same_v<T, DecClamped>) {
          return shift(in, n.var, [](Range& r) {
            if (r.lo > 0) r.lo -= 1;
            if (r.hi && *r.hi > 0) *r.hi -= 1;
          });
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          return support_join(support_post(n.then_branch, refine(in, *n.cond, true)),
                              support_post(n.else_branch, refine(in, *n.cond, false)));
        } else if constexpr (std::is_same_v<T, While>) {
          return refine(loop_head(n, in), *n.cond, false);
        } else {
          return std::nullopt;
        }
      },
      stmt->node);
}

SupportAnalysis analyze_support(const CoreProgram& p, const Support& init) {
  PairAnalysis pa;
  const PairState out = pa.run(p.body, {init, std::nullopt});
  return {support_join(out.lower, out.residual), out.residual, std::move(pa.heads)};
}

std::string to_string(const Support& s) {
  if (!s) return "bottom";
  std::ostringstream os;
  for (std::size_t k = 0; k < s->size(); ++k) {
    if (k) os << " x ";
    os << "[" << (*s)[k].lo << ",";
    if ((*s)[k].hi) os << *(*s)[k].hi;
    else os << "inf";
    os << "]";
  }
  return os.str();
}

}  // namespace geobound
