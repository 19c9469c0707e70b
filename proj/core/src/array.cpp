#include "painet/array.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace painet {

namespace {
std::atomic<std::size_t> g_live_bytes{0};
std::atomic<std::size_t> g_peak_bytes{0};

void bump_peak() {
  std::size_t live = g_live_bytes.load(std::memory_order_relaxed);
  std::size_t peak = g_peak_bytes.load(std::memory_order_relaxed);
  while (live > peak &&
         !g_peak_bytes.compare_exchange_weak(peak, live, std::memory_order_relaxed)) {
  }
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t e : s) n *= e;
  return n;
}
}  // namespace

namespace alloc_stats {
std::size_t live_bytes() { return g_live_bytes.load(std::memory_order_relaxed); }
std::size_t peak_bytes() { return g_peak_bytes.load(std::memory_order_relaxed); }
void reset_peak() { g_peak_bytes.store(g_live_bytes.load(std::memory_order_relaxed)); }
}  // namespace alloc_stats

std::string shape_str(const Shape& s) {
  if (s.empty()) return "()";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out;
}

void Array::account(std::size_t bytes) {
  accounted_ = bytes;
  if (bytes) {
    g_live_bytes.fetch_add(bytes, std::memory_order_relaxed);
    bump_peak();
  }
}

void Array::release() {
  if (accounted_) {
    g_live_bytes.fetch_sub(accounted_, std::memory_order_relaxed);
    accounted_ = 0;
  }
}

Array::Array(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {
  account(data_.size() * sizeof(double));
}

Array::Array(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_numel(shape_) != data_.size()) {
    throw shape_error("array data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape_str(shape_));
  }
  account(data_.size() * sizeof(double));
}

Array::Array(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  data_.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw shape_error("ragged initializer rows");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  shape_ = {r, c};
  account(data_.size() * sizeof(double));
}

Array::Array(const Array& o) : shape_(o.shape_), data_(o.data_) {
  account(data_.size() * sizeof(double));
}

Array::Array(Array&& o) noexcept
    : shape_(std::move(o.shape_)), data_(std::move(o.data_)), accounted_(o.accounted_) {
  o.accounted_ = 0;
}

Array& Array::operator=(const Array& o) {
  if (this != &o) {
    release();
    shape_ = o.shape_;
    data_ = o.data_;
    account(data_.size() * sizeof(double));
  }
  return *this;
}

Array& Array::operator=(Array&& o) noexcept {
  if (this != &o) {
    release();
    shape_ = std::move(o.shape_);
    data_ = std::move(o.data_);
    accounted_ = o.accounted_;
    o.accounted_ = 0;
  }
  return *this;
}

Array::~Array() { release(); }

Array Array::scalar(double v) { return Array({1}, {v}); }

Array Array::zeros(std::size_t rows, std::size_t cols) { return Array({rows, cols}); }

Array Array::full(Shape shape, double v) {
  Array a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = v;
  return a;
}

Array Array::identity(std::size_t n) {
  Array a({n, n});
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

std::size_t Array::rows() const {
  if (shape_.empty()) return 0;
  return shape_[0];
}

std::size_t Array::cols() const {
  if (shape_.size() >= 2) return shape_[1];
  return 1;
}

bool Array::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Array::scalar_value() const {
  if (numel() != 1) {
    throw contract_error("expected scalar array, got shape " + shape_str(shape_));
  }
  return data_[0];
}

Array matmul(const Array& a, const Array& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.rows()) {
    throw shape_error("matmul shape mismatch: (" + shape_str(a.shape()) + ")x(" +
                      shape_str(b.shape()) + ")");
  }
  std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Array out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = a(i, p);
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Array transpose(const Array& a) {
  if (a.ndim() != 2) throw shape_error("transpose requires rank-2, got " + shape_str(a.shape()));
  Array out({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

namespace {
void require_same_shape(const Array& a, const Array& b, const char* op) {
  if (!a.same_shape(b)) {
    throw shape_error(std::string(op) + " shape mismatch: " + shape_str(a.shape()) + " vs " +
                      shape_str(b.shape()));
  }
}
}  // namespace

Array add(const Array& a, const Array& b) {
  require_same_shape(a, b, "add");
  Array out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

Array sub(const Array& a, const Array& b) {
  require_same_shape(a, b, "sub");
  Array out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

Array hadamard(const Array& a, const Array& b) {
  require_same_shape(a, b, "hadamard");
  Array out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
  return out;
}

Array scale(const Array& a, double s) {
  Array out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
  return out;
}

double dot_row(const Array& a, std::size_t i, const Array& b, std::size_t j) {
  if (a.cols() != b.cols()) throw shape_error("dot_row width mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
  return s;
}

double row_sqdist(const Array& a, std::size_t i, const Array& b, std::size_t j) {
  if (a.cols() != b.cols()) throw shape_error("row_sqdist width mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return s;
}

double max_abs_diff(const Array& a, const Array& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double frobenius_sq(const Array& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * a[i];
  return s;
}

}  // namespace painet
