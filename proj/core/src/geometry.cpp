#include "painet/geometry.hpp"

#include <cmath>

namespace painet {

RigidTransform RigidTransform::identity() {
  return {Array::identity(3), Array({3})};
}

bool RigidTransform::valid(double tol) const {
  if (rotation.shape() != Shape{3, 3} || translation.shape() != Shape{3}) return false;
  Array qtq = matmul(transpose(rotation), rotation);
  if (max_abs_diff(qtq, Array::identity(3)) > tol) return false;
  const Array& q = rotation;
  double det = q(0, 0) * (q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1)) -
               q(0, 1) * (q(1, 0) * q(2, 2) - q(1, 2) * q(2, 0)) +
               q(0, 2) * (q(1, 0) * q(2, 1) - q(1, 1) * q(2, 0));
  return std::fabs(det - 1.0) <= tol;
}

Array random_rotation(Rng& rng) {
  // unit quaternion -> rotation matrix
  double w = rng.gaussian(), x = rng.gaussian(), y = rng.gaussian(), z = rng.gaussian();
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n < 1e-12) {
    w = 1.0;
    x = y = z = 0.0;
    n = 1.0;
  }
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Array q({3, 3});
  q(0, 0) = 1 - 2 * (y * y + z * z);
  q(0, 1) = 2 * (x * y - w * z);
  q(0, 2) = 2 * (x * z + w * y);
  q(1, 0) = 2 * (x * y + w * z);
  q(1, 1) = 1 - 2 * (x * x + z * z);
  q(1, 2) = 2 * (y * z - w * x);
  q(2, 0) = 2 * (x * z - w * y);
  q(2, 1) = 2 * (y * z + w * x);
  q(2, 2) = 1 - 2 * (x * x + y * y);
  return q;
}

RigidTransform random_transform(Rng& rng, double translation_scale) {
  RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = rng.gaussian_array({3}, translation_scale);
  return t;
}

Array apply(const RigidTransform& t, const Array& positions) {
  if (positions.ndim() != 2 || positions.cols() != 3) {
    throw shape_error("apply expects Nx3 positions, got " + shape_str(positions.shape()));
  }
  Array out = matmul(positions, transpose(t.rotation));
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < 3; ++j) out(i, j) += t.translation[j];
  return out;
}

Array apply_to_velocity(const RigidTransform& t, const Array& velocities) {
  if (velocities.ndim() != 2 || velocities.cols() != 3) {
    throw shape_error("apply_to_velocity expects Nx3 velocities, got " +
                      shape_str(velocities.shape()));
  }
  return matmul(velocities, transpose(t.rotation));
}

RigidTransform compose(const RigidTransform& t2, const RigidTransform& t1) {
  RigidTransform out;
  out.rotation = matmul(t2.rotation, t1.rotation);
  out.translation = Array({3});
  for (std::size_t i = 0; i < 3; ++i) {
    double s = t2.translation[i];
    for (std::size_t j = 0; j < 3; ++j) s += t2.rotation(i, j) * t1.translation[j];
    out.translation[i] = s;
  }
  return out;
}

Permutation::Permutation(std::vector<std::size_t> sigma) : sigma_(std::move(sigma)) {
  std::vector<bool> hit(sigma_.size(), false);
  for (std::size_t v : sigma_) {
    if (v >= sigma_.size() || hit[v]) throw contract_error("permutation mapping is not a bijection");
    hit[v] = true;
  }
  inverse_.resize(sigma_.size());
  for (std::size_t i = 0; i < sigma_.size(); ++i) inverse_[sigma_[i]] = i;
}

Permutation Permutation::random(std::size_t n, Rng& rng) {
  std::vector<std::size_t> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = i;
  rng.shuffle(sigma);
  return Permutation(std::move(sigma));
}

Permutation Permutation::inverse() const { return Permutation(inverse_); }

Array Permutation::apply_rows(const Array& a) const {
  if (a.ndim() != 2 || a.rows() != sigma_.size()) {
    throw shape_error("permutation size " + std::to_string(sigma_.size()) +
                      " does not match rows of " + shape_str(a.shape()));
  }
  Array out({a.rows(), a.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(sigma_[i], j);
  return out;
}

std::vector<std::size_t> Permutation::apply_values(const std::vector<std::size_t>& v) const {
  std::vector<std::size_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[sigma_[i]];
  return out;
}

}  // namespace painet
