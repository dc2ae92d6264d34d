#include "geobound/kernels.hpp"

#ifdef GEOBOUND_HAVE_OPENMP
#include <omp.h>
#endif

namespace geobound::kernels {
namespace {

Rational weight_at(const Event& e, const Index& idx, const std::vector<std::uint64_t>& offset) {
  return std::visit(
      [&](const auto& n) -> Rational {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          return Rational(offset[n.var] + idx[n.var] == n.value ? 1 : 0);
        } else if constexpr (std::is_same_v<T, Flip>) {
          return n.prob;
        } else if constexpr (std::is_same_v<T, Not>) {
          return 1 - weight_at(*n.inner, idx, offset);
        } else {
          Rational l = weight_at(*n.lhs, idx, offset);
          if (l == 0) return l;
          return l * weight_at(*n.rhs, idx, offset);
        }
      },
      e.node);
}

std::size_t shifted_offset(const Tensor<Rational>& dst, const Index& idx, const Index& shift) {
  std::size_t off = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) off += (idx[k] + shift[k]) * dst.stride(k);
  return off;
}

}  // namespace

Tensor<Rational> event_weights_serial(const Event& e, const std::vector<std::uint64_t>& offset,
                                      const Shape& shape) {
  Tensor<Rational> w(shape);
  Index idx(shape.size(), 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.flat(i) = weight_at(e, idx, offset);
    w.advance(idx);
  }
  return w;
}

Tensor<Rational> event_weights_parallel(const Event& e, const std::vector<std::uint64_t>& offset,
                                        const Shape& shape) {
  Tensor<Rational> w(shape);
  const long n = static_cast<long>(w.size());
#pragma omp parallel
  {
    Index idx;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      w.unravel(static_cast<std::size_t>(i), idx);
      w.flat(static_cast<std::size_t>(i)) = weight_at(e, idx, offset);
    }
  }
  return w;
}

void multiply_serial(Tensor<Rational>& a, const Tensor<Rational>& w) {
  for (std::size_t i = 0; i < a.size(); ++i) a.flat(i) *= w.flat(i);
}

void multiply_parallel(Tensor<Rational>& a, const Tensor<Rational>& w) {
  const long n = static_cast<long>(a.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) a.flat(static_cast<std::size_t>(i)) *= w.flat(static_cast<std::size_t>(i));
}

void accumulate_serial(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift) {
  Index idx(src.rank(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src.flat(i) != 0) dst.flat(shifted_offset(dst, idx, shift)) += src.flat(i);
    src.advance(idx);
  }
}

void accumulate_parallel(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift) {
  // Distinct source cells map to distinct destination cells, so no races.
  const long n = static_cast<long>(src.size());
#pragma omp parallel
  {
    Index idx;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      const auto& v = src.flat(static_cast<std::size_t>(i));
      if (v == 0) continue;
      src.unravel(static_cast<std::size_t>(i), idx);
      dst.flat(shifted_offset(dst, idx, shift)) += v;
    }
  }
}

Rational sum_serial(const Tensor<Rational>& a) {
  Rational s = 0;
  for (const auto& v : a.data()) s += v;
  return s;
}

Rational sum_parallel(const Tensor<Rational>& a) {
#ifdef GEOBOUND_HAVE_OPENMP
  std::vector<Rational> partial(static_cast<std::size_t>(omp_get_max_threads()), Rational(0));
  const long n = static_cast<long>(a.size());
#pragma omp parallel
  {
    Rational local = 0;
#pragma omp for schedule(static) nowait
    for (long i = 0; i < n; ++i) local += a.flat(static_cast<std::size_t>(i));
    partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
  }
  Rational s = 0;
  for (const auto& p : partial) s += p;
  return s;
#else
  return sum_serial(a);
#endif
}

#ifdef GEOBOUND_HAVE_OPENMP
Tensor<Rational> event_weights(const Event& e, const std::vector<std::uint64_t>& offset,
                               const Shape& shape) {
  return volume(shape) < kParallelThreshold ? event_weights_serial(e, offset, shape)
                                            : event_weights_parallel(e, offset, shape);
}
void multiply(Tensor<Rational>& a, const Tensor<Rational>& w) {
  a.size() < kParallelThreshold ? multiply_serial(a, w) : multiply_parallel(a, w);
}
void accumulate(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift) {
  src.size() < kParallelThreshold ? accumulate_serial(dst, src, shift)
                                  : accumulate_parallel(dst, src, shift);
}
Rational sum(const Tensor<Rational>& a) {
  return a.size() < kParallelThreshold ? sum_serial(a) : sum_parallel(a);
}
#else
Tensor<Rational> event_weights(const Event& e, const std::vector<std::uint64_t>& offset,
                               const Shape& shape) {
  return event_weights_serial(e, offset, shape);
}
void multiply(Tensor<Rational>& a, const Tensor<Rational>& w) { multiply_serial(a, w); }
void accumulate(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift) {
  accumulate_serial(dst, src, shift);
}
Rational sum(const Tensor<Rational>& a) { return sum_serial(a); }
#endif

}  // namespace geobound::kernels
