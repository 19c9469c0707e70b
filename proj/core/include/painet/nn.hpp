#pragma once

#include <string>
#include <utility>
#include <vector>

#include "painet/autodiff.hpp"
#include "painet/rng.hpp"

namespace painet {

using NamedParams = std::vector<std::pair<std::string, Var>>;

/// Affine layer; weight {in,out}, bias {1,out}.
struct Linear {
  Var weight;
  Var bias;

  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  Var forward(const Var& x) const { return add_rowvec(matmul(x, weight), bias); }
};

/// Feed-forward stack with SiLU between layers; the output activation is
/// optional (message MLPs use it, coordinate heads do not).
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<std::size_t>& dims, bool silu_output, Rng& rng);

  Var forward(const Var& x) const;
  /// Zero the final affine layer so the head starts as the null map.
  void zero_last_layer();
  /// Rescale the final affine layer (small coordinate heads keep untrained
  /// position updates moderate).
  void scale_last_layer(double factor);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t n_layers() const { return layers_.size(); }

  void collect(const std::string& prefix, NamedParams& out) const;

 private:
  std::vector<Linear> layers_;
  bool silu_output_ = false;
  std::size_t in_dim_ = 0, out_dim_ = 0;
};

}  // namespace painet
