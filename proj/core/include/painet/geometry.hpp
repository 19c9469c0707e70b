#pragma once

#include <cstdint>
#include <vector>

#include "painet/array.hpp"
#include "painet/rng.hpp"

namespace painet {

/// Proper rigid motion: x -> Q x + g with Q in SO(3).
struct RigidTransform {
  Array rotation;     // 3x3
  Array translation;  // {3}

  static RigidTransform identity();
  /// QtQ = I and det Q = +1, both within tol.
  bool valid(double tol = 1e-10) const;
};

/// Uniform random rotation via normalized quaternion.
Array random_rotation(Rng& rng);
RigidTransform random_transform(Rng& rng, double translation_scale = 1.0);

/// Rows of X mapped through Q x + g.
Array apply(const RigidTransform& t, const Array& positions);
/// Velocities rotate but do not translate.
Array apply_to_velocity(const RigidTransform& t, const Array& velocities);
/// Composition: apply(compose(t2, t1), X) == apply(t2, apply(t1, X)).
RigidTransform compose(const RigidTransform& t2, const RigidTransform& t1);

/// Bijection on {0..n-1}. Row i of the permuted array is row sigma(i) of
/// the input (the action of the permutation matrix P with P[i, sigma(i)]=1).
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> sigma);
  static Permutation random(std::size_t n, Rng& rng);

  std::size_t size() const { return sigma_.size(); }
  std::size_t operator()(std::size_t i) const { return sigma_[i]; }
  /// New position of the node previously labelled `old_index`.
  std::size_t relabel(std::size_t old_index) const { return inverse_[old_index]; }

  Permutation inverse() const;
  Array apply_rows(const Array& a) const;
  std::vector<std::size_t> apply_values(const std::vector<std::size_t>& v) const;

 private:
  std::vector<std::size_t> sigma_;
  std::vector<std::size_t> inverse_;
};

}  // namespace painet
