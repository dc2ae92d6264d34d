#pragma once

// Dense kernels over rational arrays. Each exists as a serial reference and
// an OpenMP version; both must agree exactly.

#include <vector>

#include "geobound/lang.hpp"
#include "geobound/rational.hpp"
#include "geobound/tensor.hpp"

namespace geobound::kernels {

/// Weight of an event at every cell of the box [offset, offset + shape).
/// VarEq gives 0/1, flip gives its probability, negation 1 - w, conjunction a product.
Tensor<Rational> event_weights_serial(const Event& e, const std::vector<std::uint64_t>& offset,
                                      const Shape& shape);
Tensor<Rational> event_weights_parallel(const Event& e, const std::vector<std::uint64_t>& offset,
                                        const Shape& shape);

/// a[i] *= w[i]
void multiply_serial(Tensor<Rational>& a, const Tensor<Rational>& w);
void multiply_parallel(Tensor<Rational>& a, const Tensor<Rational>& w);

/// dst[idx + shift] += src[idx]; src must fit inside dst after shifting.
void accumulate_serial(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift);
void accumulate_parallel(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift);

Rational sum_serial(const Tensor<Rational>& a);
Rational sum_parallel(const Tensor<Rational>& a);

/// Dispatch used by the library; parallel when built with OpenMP.
Tensor<Rational> event_weights(const Event& e, const std::vector<std::uint64_t>& offset,
                               const Shape& shape);
void multiply(Tensor<Rational>& a, const Tensor<Rational>& w);
void accumulate(Tensor<Rational>& dst, const Tensor<Rational>& src, const Index& shift);
Rational sum(const Tensor<Rational>& a);

/// Cells below which the dispatchers stay serial.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace geobound::kernels
