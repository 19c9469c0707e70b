#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "painet/errors.hpp"

namespace painet {

/// Row-major extents, e.g. {3, 4} for a 3x4 matrix, {1} for a scalar.
using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

/// Byte accounting for live Array buffers. peak_bytes() is the high-water
/// mark since the last reset_peak(); metrics::scaling_probe reads it.
namespace alloc_stats {
std::size_t live_bytes();
std::size_t peak_bytes();
void reset_peak();
}  // namespace alloc_stats

/// Dense 64-bit float array, row-major. Treated as an immutable value once
/// published to other threads; mutation is for construction and internals.
class Array {
 public:
  Array() = default;
  explicit Array(Shape shape);  // zero-filled
  Array(Shape shape, std::vector<double> values);
  Array(std::initializer_list<std::initializer_list<double>> rows);

  Array(const Array& o);
  Array(Array&& o) noexcept;
  Array& operator=(const Array& o);
  Array& operator=(Array&& o) noexcept;
  ~Array();

  static Array scalar(double v);
  static Array zeros(std::size_t rows, std::size_t cols);
  static Array full(Shape shape, double v);
  static Array identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Leading extent for rank-1/2 arrays.
  std::size_t rows() const;
  /// Trailing extent; 1 for rank-1 arrays.
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }

  bool same_shape(const Array& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  /// Value of a single-element array; contract error otherwise.
  double scalar_value() const;

 private:
  void account(std::size_t bytes);
  void release();

  Shape shape_;
  std::vector<double> data_;
  std::size_t accounted_ = 0;
};

// Plain (non-differentiable) array math used by the geometry/energy/data
// modules and by test oracles. The differentiable counterparts live in
// autodiff.hpp.
Array matmul(const Array& a, const Array& b);
Array transpose(const Array& a);
Array add(const Array& a, const Array& b);
Array sub(const Array& a, const Array& b);
Array hadamard(const Array& a, const Array& b);
Array scale(const Array& a, double s);
double dot_row(const Array& a, std::size_t i, const Array& b, std::size_t j);
double row_sqdist(const Array& a, std::size_t i, const Array& b, std::size_t j);
double max_abs_diff(const Array& a, const Array& b);
double frobenius_sq(const Array& a);

}  // namespace painet
