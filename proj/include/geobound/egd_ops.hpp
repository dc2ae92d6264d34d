#pragma once

// Generic EGD algebra. `Ops` supplies the scalar arithmetic:
//   Value zero(), one(), constant(Rational)
//   Value add(a,b), mul(a,b), div(a,b)
//   Value nsub(a,b)          a - b where a >= b is known
//   Value one_minus(a)       1 - a for a in [0,1)
// The concrete layer instantiates it with rationals, the symbolic layer with
// expression nodes.

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "geobound/lang.hpp"
#include "geobound/rational.hpp"
#include "geobound/tensor.hpp"

namespace geobound {

template <class V>
struct BasicEgd {
  Tensor<V> block;
  std::vector<V> decay;

  std::size_t dims() const { return decay.size(); }
  const Shape& shape() const { return block.shape(); }
};

namespace egd_ops {

template <class Ops, class V = typename Ops::Value>
V power(Ops& ops, const V& base, std::size_t e) {
  V out = ops.one();
  for (std::size_t i = 0; i < e; ++i) out = ops.mul(out, base);
  return out;
}

/// Builds a tensor of `shape` from f(index).
template <class V, class F>
Tensor<V> build(const Shape& shape, F&& f) {
  Tensor<V> out(shape);
  Index idx(shape.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.flat(i) = f(static_cast<const Index&>(idx));
    out.advance(idx);
  }
  return out;
}

/// Entry of the (virtually) expanded block at an arbitrary index.
template <class Ops, class V = typename Ops::Value>
V entry_at(Ops& ops, const BasicEgd<V>& g, std::span<const std::size_t> idx) {
  Index clamped(idx.begin(), idx.end());
  V factor = ops.one();
  bool scaled = false;
  for (std::size_t k = 0; k < clamped.size(); ++k) {
    const std::size_t ext = g.block.extent(k);
    if (clamped[k] >= ext) {
      factor = ops.mul(factor, power(ops, g.decay[k], clamped[k] - ext + 1));
      clamped[k] = ext - 1;
      scaled = true;
    }
  }
  const V& base = g.block(clamped);
  return scaled ? ops.mul(base, factor) : base;
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> expand(Ops& ops, const BasicEgd<V>& g, const Shape& shape) {
  if (shape == g.block.shape()) return g;
  return {build<V>(shape, [&](const Index& idx) { return entry_at(ops, g, idx); }), g.decay};
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> scale(Ops& ops, const BasicEgd<V>& g, const V& factor) {
  BasicEgd<V> out = g;
  for (auto& v : out.block.data()) v = ops.mul(factor, v);
  return out;
}

/// Sum of all slices along `axis`, the last one weighted by 1/(1-decay).
/// The result keeps the axis with extent 1.
template <class Ops, class V = typename Ops::Value>
Tensor<V> collapse_axis(Ops& ops, const BasicEgd<V>& g, std::size_t axis) {
  Shape shape = g.block.shape();
  const std::size_t ext = shape[axis];
  shape[axis] = 1;
  const V tail_scale = ops.one_minus(g.decay[axis]);
  return build<V>(shape, [&](const Index& idx) {
    Index src = idx;
    V acc = ops.zero();
    for (std::size_t j = 0; j + 1 < ext; ++j) {
      src[axis] = j;
      acc = ops.add(acc, g.block(src));
    }
    src[axis] = ext - 1;
    return ops.add(acc, ops.div(g.block(src), tail_scale));
  });
}

/// Drops dimension k (marginal distribution of the others).
template <class Ops, class V = typename Ops::Value>
BasicEgd<V> marginalize(Ops& ops, const BasicEgd<V>& g, std::size_t k) {
  const Tensor<V> collapsed = collapse_axis(ops, g, k);
  Shape shape = g.block.shape();
  shape.erase(shape.begin() + static_cast<long>(k));
  BasicEgd<V> out;
  out.block = Tensor<V>(shape);
  for (std::size_t i = 0; i < collapsed.size(); ++i) out.block.flat(i) = collapsed.flat(i);
  out.decay = g.decay;
  out.decay.erase(out.decay.begin() + static_cast<long>(k));
  return out;
}

/// Marginal of a single variable as a one-dimensional EGD.
template <class Ops, class V = typename Ops::Value>
BasicEgd<V> marginal_of(Ops& ops, BasicEgd<V> g, std::size_t var) {
  for (std::size_t k = g.dims(); k-- > 0;) {
    if (k != var) g = marginalize(ops, g, k);
  }
  return g;
}

template <class Ops, class V = typename Ops::Value>
V total_mass(Ops& ops, BasicEgd<V> g) {
  while (g.dims() > 0) g = marginalize(ops, g, g.dims() - 1);
  return g.block.flat(0);
}

/// Eulerian numbers A(k, m), m = 0..k-1.
inline std::vector<std::uint64_t> eulerian_row(std::size_t k) {
  std::vector<std::uint64_t> row{1};
  for (std::size_t n = 2; n <= k; ++n) {
    std::vector<std::uint64_t> next(n, 0);
    for (std::size_t m = 0; m < n; ++m) {
      std::uint64_t v = 0;
      if (m < row.size()) v += (m + 1) * row[m];
      if (m >= 1 && m - 1 < row.size()) v += (n - m) * row[m - 1];
      next[m] = v;
    }
    row = std::move(next);
  }
  return row;
}

/// E[Y^k] for P(Y = n) = (1 - a) a^n, i.e. a * A_k(a) / (1 - a)^k for k >= 1.
template <class Ops, class V = typename Ops::Value>
V geometric_moment(Ops& ops, const V& a, std::size_t k) {
  if (k == 0) return ops.one();
  const auto row = eulerian_row(k);
  V poly = ops.zero();
  for (std::size_t m = 0; m < row.size(); ++m) {
    poly = ops.add(poly, ops.mul(ops.constant(Rational(static_cast<unsigned long>(row[m]))), power(ops, a, m)));
  }
  return ops.div(ops.mul(a, poly), power(ops, ops.one_minus(a), k));
}

/// k-th moment of a one-dimensional EGD.
template <class Ops, class V = typename Ops::Value>
V moment(Ops& ops, const BasicEgd<V>& g, std::size_t k) {
  const std::size_t d = g.block.extent(0) - 1;
  const auto ipow = [](std::size_t base, std::size_t e) {
    Rational r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= static_cast<unsigned long>(base);
    return r;
  };
  V acc = ops.zero();
  for (std::size_t j = 0; j < d; ++j) {
    if (j == 0 && k > 0) continue;
    acc = ops.add(acc, ops.mul(ops.constant(ipow(j, k)), g.block.flat(j)));
  }
  V tail = ops.zero();
  for (std::size_t i = 0; i <= k; ++i) {
    Rational binom = 1;
    for (std::size_t t = 0; t < i; ++t) binom = binom * static_cast<unsigned long>(k - t) / static_cast<unsigned long>(t + 1);
    const Rational c = binom * ipow(d, k - i);
    if (c == 0) continue;
    tail = ops.add(tail, ops.mul(ops.constant(c), geometric_moment(ops, g.decay[0], i)));
  }
  return ops.add(acc, ops.mul(ops.div(g.block.flat(d), ops.one_minus(g.decay[0])), tail));
}

/// Restriction to an event.
template <class Ops, class V = typename Ops::Value>
BasicEgd<V> restrict(Ops& ops, const BasicEgd<V>& g, const Event& e) {
  return std::visit(
      [&](const auto& n) -> BasicEgd<V> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          Shape shape = g.block.shape();
          shape[n.var] = std::max<std::size_t>(shape[n.var], n.value + 2);
          BasicEgd<V> out;
          out.block = build<V>(shape, [&](const Index& idx) {
            return idx[n.var] == n.value ? entry_at(ops, g, idx) : ops.zero();
          });
          out.decay = g.decay;
          out.decay[n.var] = ops.zero();
          return out;
        } else if constexpr (std::is_same_v<T, Flip>) {
          return scale(ops, g, ops.constant(n.prob));
        } else if constexpr (std::is_same_v<T, Not>) {
          const BasicEgd<V> r = restrict(ops, g, *n.inner);
          BasicEgd<V> out;
          out.block = build<V>(r.block.shape(), [&](const Index& idx) {
            return ops.nsub(entry_at(ops, g, idx), r.block(idx));
          });
          out.decay = g.decay;
          return out;
        } else {
          return restrict(ops, restrict(ops, g, *n.lhs), *n.rhs);
        }
      },
      e.node);
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> set_zero(Ops& ops, const BasicEgd<V>& g, std::size_t k) {
  const Tensor<V> collapsed = collapse_axis(ops, g, k);
  Shape shape = g.block.shape();
  shape[k] = 2;
  BasicEgd<V> out;
  out.block = build<V>(shape, [&](const Index& idx) {
    if (idx[k] != 0) return ops.zero();
    return collapsed(idx);
  });
  out.decay = g.decay;
  out.decay[k] = ops.zero();
  return out;
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> add_const(Ops& ops, const BasicEgd<V>& g, std::size_t k, std::size_t a) {
  Shape shape = g.block.shape();
  shape[k] += a;
  BasicEgd<V> out;
  out.block = build<V>(shape, [&](const Index& idx) {
    if (idx[k] < a) return ops.zero();
    Index src = idx;
    src[k] -= a;
    return g.block(src);
  });
  out.decay = g.decay;
  return out;
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> dec(Ops& ops, const BasicEgd<V>& g, std::size_t k) {
  Shape shape = g.block.shape();
  shape[k] = std::max<std::size_t>(shape[k] - 1, 2);
  BasicEgd<V> out;
  out.block = build<V>(shape, [&](const Index& idx) {
    Index src = idx;
    src[k] = idx[k] + 1;
    V shifted = entry_at(ops, g, src);
    if (idx[k] != 0) return shifted;
    src[k] = 0;
    return ops.add(g.block(src), shifted);
  });
  out.decay = g.decay;
  return out;
}

template <class Ops, class V = typename Ops::Value>
BasicEgd<V> fail(Ops& ops, std::size_t dims) {
  BasicEgd<V> out;
  out.block = Tensor<V>(Shape(dims, 1), ops.zero());
  out.decay.assign(dims, ops.zero());
  return out;
}

/// Join with decays from `combine` (the max for strict joins); the block is
/// the sum of both expansions to the common size.
template <class Ops, class V = typename Ops::Value, class Combine>
BasicEgd<V> join(Ops& ops, const BasicEgd<V>& a, const BasicEgd<V>& b, Combine&& combine) {
  Shape shape(a.dims());
  for (std::size_t k = 0; k < shape.size(); ++k) shape[k] = std::max(a.block.extent(k), b.block.extent(k));
  BasicEgd<V> out;
  out.block = build<V>(shape, [&](const Index& idx) { return ops.add(entry_at(ops, a, idx), entry_at(ops, b, idx)); });
  out.decay.resize(a.dims());
  for (std::size_t k = 0; k < a.dims(); ++k) out.decay[k] = combine(a.decay[k], b.decay[k]);
  return out;
}

/// Calls f(lhs, rhs) for every inequality lhs <= rhs making up a <=_EGD b:
/// the decay comparisons first, then every entry of the common expansion.
template <class Ops, class V = typename Ops::Value, class F>
void for_each_le(Ops& ops, const BasicEgd<V>& a, const BasicEgd<V>& b, F&& f) {
  for (std::size_t k = 0; k < a.dims(); ++k) f(a.decay[k], b.decay[k]);
  Shape shape(a.dims());
  for (std::size_t k = 0; k < shape.size(); ++k) shape[k] = std::max(a.block.extent(k), b.block.extent(k));
  Index idx(shape.size(), 0);
  const std::size_t n = volume(shape);
  for (std::size_t i = 0; i < n; ++i) {
    f(entry_at(ops, a, idx), entry_at(ops, b, idx));
    for (std::size_t k = shape.size(); k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
}

}  // namespace egd_ops
}  // namespace geobound
