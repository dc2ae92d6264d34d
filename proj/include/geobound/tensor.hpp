#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace geobound {

using Shape = std::vector<std::size_t>;
using Index = std::vector<std::size_t>;

inline std::size_t volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// Dense row-major n-dimensional array. Rank 0 holds a single scalar.
template <class T>
class Tensor {
 public:
  Tensor() : data_(1) {}

  explicit Tensor(Shape shape, const T& fill = T{})
      : shape_(std::move(shape)), strides_(shape_.size()), data_(volume(shape_), fill) {
    compute_strides();
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  std::size_t offset(std::span<const std::size_t> idx) const {
    assert(idx.size() == shape_.size());
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      assert(idx[k] < shape_[k]);
      off += idx[k] * strides_[k];
    }
    return off;
  }

  T& operator()(std::span<const std::size_t> idx) { return data_[offset(idx)]; }
  const T& operator()(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }

  T& flat(std::size_t i) { return data_[i]; }
  const T& flat(std::size_t i) const { return data_[i]; }

  void unravel(std::size_t flat_index, Index& idx) const {
    idx.resize(shape_.size());
    for (std::size_t k = shape_.size(); k-- > 0;) {
      idx[k] = flat_index % shape_[k];
      flat_index /= shape_[k];
    }
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  /// Calls f(index, value) for every cell in row-major order.
  template <class F>
  void for_each(F&& f) const {
    Index idx(shape_.size(), 0);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      f(static_cast<const Index&>(idx), data_[i]);
      advance(idx);
    }
  }

  /// Advances a multi-index in row-major order; returns false after the last cell.
  bool advance(Index& idx) const {
    for (std::size_t k = shape_.size(); k-- > 0;) {
      if (++idx[k] < shape_[k]) return true;
      idx[k] = 0;
    }
    return false;
  }

  bool operator==(const Tensor& other) const = default;

 private:
  void compute_strides() {
    std::size_t s = 1;
    for (std::size_t k = shape_.size(); k-- > 0;) {
      strides_[k] = s;
      s *= shape_[k];
    }
  }

  Shape shape_;
  std::vector<std::size_t> strides_;
  std::vector<T> data_;
};

}  // namespace geobound
