#include "painet/nn.hpp"

#include <cmath>

namespace painet {

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  // Glorot-uniform weights, zero bias
  double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Linear l;
  l.weight = Var::param(rng.uniform_array({in, out}, -limit, limit));
  l.bias = Var::param(Array({1, out}));
  return l;
}

Mlp::Mlp(const std::vector<std::size_t>& dims, bool silu_output, Rng& rng)
    : silu_output_(silu_output) {
  if (dims.size() < 2) throw contract_error("Mlp needs at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers_.push_back(Linear::init(dims[i], dims[i + 1], rng));
  }
  in_dim_ = dims.front();
  out_dim_ = dims.back();
}

Var Mlp::forward(const Var& x) const {
  if (layers_.empty()) throw contract_error("forward on empty Mlp");
  Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size() || silu_output_) h = silu(h);
  }
  return h;
}

void Mlp::zero_last_layer() {
  Linear& last = layers_.back();
  last.weight.set_value(Array(last.weight.value().shape()));
  last.bias.set_value(Array(last.bias.value().shape()));
}

void Mlp::scale_last_layer(double factor) {
  Linear& last = layers_.back();
  last.weight.set_value(painet::scale(last.weight.value(), factor));
  last.bias.set_value(painet::scale(last.bias.value(), factor));
}

void Mlp::collect(const std::string& prefix, NamedParams& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.emplace_back(prefix + ".w" + std::to_string(i), layers_[i].weight);
    out.emplace_back(prefix + ".b" + std::to_string(i), layers_[i].bias);
  }
}

}  // namespace painet
