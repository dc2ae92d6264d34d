#include "geobound/measure.hpp"

#include <algorithm>
#include <limits>

#include "geobound/kernels.hpp"

namespace geobound {
namespace {

Shape unit_shape(std::size_t dims) { return Shape(dims, 1); }

std::size_t checked_volume(const Shape& shape, std::size_t cap) {
  std::size_t v = 1;
  for (std::size_t e : shape) {
    if (e != 0 && v > cap / e) throw ResourceLimit("state box exceeds the cell limit");
    v *= e;
  }
  if (v > cap) throw ResourceLimit("state box exceeds the cell limit");
  return v;
}

/// Moves every cell along `axis` through `map` (old position -> new position
/// within an axis of `new_extent`), summing collisions.
StateDist remap_axis(const StateDist& mu, std::size_t axis, std::size_t new_extent, std::uint64_t new_offset,
                     auto map) {
  StateDist out;
  out.offset = mu.offset;
  out.offset[axis] = new_offset;
  Shape shape = mu.masses.shape();
  shape[axis] = new_extent;
  out.masses = Tensor<Rational>(shape);
  out.failure = mu.failure;
  Index idx(shape.size(), 0);
  for (std::size_t i = 0; i < mu.masses.size(); ++i) {
    const auto& v = mu.masses.flat(i);
    if (v != 0) {
      const std::size_t keep = idx[axis];
      idx[axis] = map(keep);
      out.masses(idx) += v;
      idx[axis] = keep;
    }
    mu.masses.advance(idx);
  }
  return out;
}

StateDist run(const StmtPtr& stmt, const StateDist& mu, const MeasureOptions& opts) {
  if (opts.deadline) opts.deadline->check();
  return std::visit(
      [&](const auto& n) -> StateDist {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          return mu;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return run(n.second, run(n.first, mu, opts), opts);
        } else if constexpr (std::is_same_v<T, SetZero>) {
          StateDist out = remap_axis(mu, n.var, 1, 0, [](std::size_t) { return std::size_t{0}; });
          return out;
        } else if constexpr (std::is_same_v<T, AddConst>) {
          StateDist out = mu;
          out.offset[n.var] += n.amount;
          return out;
        } else if constexpr (std::is_same_v<T, DecClamped>) {
          if (mu.offset[n.var] > 0) {
            StateDist out = mu;
            out.offset[n.var] -= 1;
            return out;
          }
          const std::size_t ext = mu.masses.extent(n.var);
          if (ext == 1) return mu;
          return remap_axis(mu, n.var, ext - 1, 0, [](std::size_t i) { return i == 0 ? i : i - 1; });
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          const Tensor<Rational> w = kernels::event_weights(*n.cond, mu.offset, mu.masses.shape());
          StateDist yes;
          yes.offset = mu.offset;
          yes.masses = mu.masses;
          kernels::multiply(yes.masses, w);
          StateDist no;
          no.offset = mu.offset;
          no.masses = mu.masses;
          for (std::size_t i = 0; i < no.masses.size(); ++i) no.masses.flat(i) -= yes.masses.flat(i);
          yes.trim();
          no.trim();
          StateDist out = add(run(n.then_branch, yes, opts), run(n.else_branch, no, opts), opts);
          out.failure += mu.failure;
          return out;
        } else if constexpr (std::is_same_v<T, While>) {
          return StateDist::zero(mu.dims());
        } else {
          StateDist out = StateDist::zero(mu.dims());
          out.failure = mu.total();
          return out;
        }
      },
      stmt->node);
}

bool box_contains(const StateDist& d, std::span<const std::uint64_t> point) {
  for (std::size_t k = 0; k < d.dims(); ++k) {
    if (point[k] < d.offset[k] || point[k] - d.offset[k] >= d.masses.extent(k)) return false;
  }
  return true;
}

}  // namespace

StateDist StateDist::zero(std::size_t dims) {
  StateDist d;
  d.offset.assign(dims, 0);
  d.masses = Tensor<Rational>(unit_shape(dims));
  return d;
}

StateDist StateDist::dirac(const std::vector<std::uint64_t>& point) {
  StateDist d;
  d.offset = point;
  d.masses = Tensor<Rational>(unit_shape(point.size()), Rational(1));
  return d;
}

Rational StateDist::mass_at(std::span<const std::uint64_t> point) const {
  if (point.size() != dims() || !box_contains(*this, point)) return 0;
  Index idx(dims());
  for (std::size_t k = 0; k < dims(); ++k) idx[k] = point[k] - offset[k];
  return masses(idx);
}

Rational StateDist::state_mass() const { return kernels::sum(masses); }

std::vector<Rational> StateDist::marginal(std::size_t var) const {
  std::vector<Rational> out(offset[var] + masses.extent(var), Rational(0));
  masses.for_each([&](const Index& idx, const Rational& v) {
    if (v != 0) out[offset[var] + idx[var]] += v;
  });
  return out;
}

void StateDist::trim() {
  const std::size_t n = dims();
  std::vector<std::size_t> lo(n, std::numeric_limits<std::size_t>::max()), hi(n, 0);
  bool any = false;
  masses.for_each([&](const Index& idx, const Rational& v) {
    if (v == 0) return;
    any = true;
    for (std::size_t k = 0; k < n; ++k) {
      lo[k] = std::min(lo[k], idx[k]);
      hi[k] = std::max(hi[k], idx[k]);
    }
  });
  if (!any) {
    offset.assign(n, 0);
    masses = Tensor<Rational>(unit_shape(n));
    return;
  }
  bool same = true;
  Shape shape(n);
  for (std::size_t k = 0; k < n; ++k) {
    shape[k] = hi[k] - lo[k] + 1;
    same = same && shape[k] == masses.extent(k);
  }
  if (same) return;
  Tensor<Rational> out(shape);
  Index src(n);
  Index idx(n, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) src[k] = idx[k] + lo[k];
    out.flat(i) = std::move(masses(src));
    out.advance(idx);
  }
  for (std::size_t k = 0; k < n; ++k) offset[k] += lo[k];
  masses = std::move(out);
}

bool StateDist::operator==(const StateDist& other) const {
  if (failure != other.failure || dims() != other.dims()) return false;
  StateDist a = *this, b = other;
  a.trim();
  b.trim();
  if (a.state_mass() == 0 && b.state_mass() == 0) return true;
  return a.offset == b.offset && a.masses == b.masses;
}

StateDist restrict_event(const StateDist& mu, const Event& e) {
  StateDist out;
  out.offset = mu.offset;
  out.masses = mu.masses;
  kernels::multiply(out.masses, kernels::event_weights(e, mu.offset, mu.masses.shape()));
  out.trim();
  return out;
}

StateDist add(const StateDist& a, const StateDist& b, const MeasureOptions& opts) {
  const bool a_empty = a.state_mass() == 0, b_empty = b.state_mass() == 0;
  if (b_empty) {
    StateDist out = a;
    out.failure += b.failure;
    return out;
  }
  if (a_empty) {
    StateDist out = b;
    out.failure += a.failure;
    return out;
  }
  const std::size_t n = a.dims();
  StateDist out;
  out.offset.resize(n);
  Shape shape(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.offset[k] = std::min(a.offset[k], b.offset[k]);
    const std::uint64_t end = std::max(a.offset[k] + a.masses.extent(k), b.offset[k] + b.masses.extent(k));
    shape[k] = end - out.offset[k];
  }
  checked_volume(shape, opts.max_cells);
  out.masses = Tensor<Rational>(shape);
  Index shift(n);
  for (std::size_t k = 0; k < n; ++k) shift[k] = a.offset[k] - out.offset[k];
  kernels::accumulate(out.masses, a.masses, shift);
  for (std::size_t k = 0; k < n; ++k) shift[k] = b.offset[k] - out.offset[k];
  kernels::accumulate(out.masses, b.masses, shift);
  out.failure = a.failure + b.failure;
  return out;
}

StateDist scale(StateDist mu, const Rational& factor) {
  for (auto& v : mu.masses.data()) v *= factor;
  mu.failure *= factor;
  mu.trim();
  return mu;
}

StateDist lower_semantics(const StmtPtr& stmt, const StateDist& mu, const MeasureOptions& opts) {
  checked_volume(mu.masses.shape(), opts.max_cells);
  return run(stmt, mu, opts);
}

StateDist lower_semantics(const CoreProgram& p, const StateDist& mu, const MeasureOptions& opts) {
  return lower_semantics(p.body, mu, opts);
}

Rational residual_mass(const CoreProgram& p, const StateDist& mu, std::size_t u, const MeasureOptions& opts) {
  return mu.total() - lower_semantics(unroll(p.body, u), mu, opts).total();
}

Rational finite_moment(const StateDist& d, std::size_t var, std::size_t k) {
  Rational s = 0;
  const auto marg = d.marginal(var);
  for (std::size_t x = 0; x < marg.size(); ++x) {
    if (marg[x] != 0) s += marg[x] * pow(Rational(static_cast<unsigned long>(x)), k);
  }
  return s;
}

namespace {

bool outside(const Region& region, const std::optional<RangeBox>& box) {
  if (!box) return !std::holds_alternative<FailureRegion>(region);
  if (const auto* p = std::get_if<PointRegion>(&region)) {
    for (std::size_t k = 0; k < p->point.size(); ++k) {
      if (!(*box)[k].contains(p->point[k])) return true;
    }
    return false;
  }
  if (const auto* m = std::get_if<MarginalRegion>(&region)) return !(*box)[m->var].contains(m->value);
  return false;
}

}  // namespace

PosteriorBounds posterior_bounds(const StateDist& lower, const Rational& residual, const Region& region,
                                 const std::optional<std::optional<RangeBox>>& residual_support) {
  Rational l;
  if (const auto* p = std::get_if<PointRegion>(&region)) {
    l = lower.mass_at(p->point);
  } else if (std::holds_alternative<FailureRegion>(region)) {
    l = lower.failure;
  } else {
    const auto& m = std::get<MarginalRegion>(region);
    const auto marg = lower.marginal(m.var);
    l = m.value < marg.size() ? marg[m.value] : Rational(0);
  }
  const Rational reach = residual_support && outside(region, *residual_support) ? Rational(0) : residual;
  PosteriorBounds out;
  out.unnormalized = {l, l + reach};
  const Rational f = lower.failure;
  const Rational lo_den = 1 - f;
  const Rational hi_den = 1 - f - residual;
  out.normalized.lo = lo_den > 0 ? Rational(l / lo_den) : Rational(0);
  if (hi_den > 0) out.normalized.hi = Rational((l + reach) / hi_den);
  else out.normalized.hi = std::nullopt;
  return out;
}

Interval normalization_bounds(const StateDist& lower, const Rational& residual) {
  const Rational hi = 1 - lower.failure;
  Rational lo = hi - residual;
  if (lo < 0) lo = 0;
  return {lo, hi};
}

}  // namespace geobound
