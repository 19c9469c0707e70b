#include "painet/attention.hpp"

#include <cmath>

namespace painet {

AttentionLayerParams AttentionLayerParams::init(std::size_t d, double eta, Rng& rng) {
  if (eta <= 0.0 || eta >= 1.0) throw contract_error("attention eta must lie in (0,1)");
  double s = 1.0 / std::sqrt(static_cast<double>(d));
  AttentionLayerParams p;
  p.w_q = Var::param(rng.gaussian_array({d, d}, s));
  p.w_k = Var::param(rng.gaussian_array({d, d}, s));
  p.w_v = Var::param(rng.gaussian_array({d, d}, s));
  p.eta = eta;
  return p;
}

PairwiseMaps PairwiseMaps::init(std::size_t n_types, Rng& rng) {
  PairwiseMaps m;
  m.table_phi = Var::param(rng.gaussian_array({n_types, n_types}, 0.1));
  m.table_psi = Var::param(rng.gaussian_array({n_types, n_types}, 0.1));
  m.log_s1 = Var::param(Array::scalar(0.0));
  m.log_s2 = Var::param(Array::scalar(-1.0));
  return m;
}

PairwiseMaps PairwiseMaps::bind(Array onehot) const {
  if (onehot.ndim() != 2 || onehot.cols() != n_types()) {
    throw shape_error("type assignment must be Nx" + std::to_string(n_types()) + ", got " +
                      shape_str(onehot.shape()));
  }
  for (std::size_t i = 0; i < onehot.rows(); ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < onehot.cols(); ++j) {
      if (onehot(i, j) == 1.0) ++ones;
      else if (onehot(i, j) != 0.0) throw contract_error("type rows must be one-hot");
    }
    if (ones != 1) throw contract_error("type rows must be one-hot");
  }
  PairwiseMaps bound = *this;
  bound.type_onehot = std::move(onehot);
  return bound;
}

std::pair<Var, Var> materialize_maps(const PairwiseMaps& maps) {
  if (maps.type_onehot.empty()) throw contract_error("pairwise maps not bound to a type assignment");
  Var z = Var::constant(maps.type_onehot);
  Var zt = Var::constant(transpose(maps.type_onehot));
  Var sig_phi = sigmoid(matmul(matmul(z, maps.table_phi), zt));
  Var sig_psi = sigmoid(matmul(matmul(z, maps.table_psi), zt));
  Var s1 = vexp(maps.log_s1);
  Var s2 = vexp(maps.log_s2);
  if (!maps.strict_eq9) {
    // keep max(Psi) < min(Phi) so every mixing weight stays positive
    Var bound = mul_scalar(min_all(sig_phi), s1);
    s2 = min_scalar(s2, bound);
  }
  return {mul_scalar(sig_phi, s1), mul_scalar(sig_psi, s2)};
}

std::pair<Array, Array> materialize_maps_values(const PairwiseMaps& maps) {
  auto [phi, psi] = materialize_maps(maps);
  return {phi.value(), psi.value()};
}

Array attention_step_pairwise(const Array& embeddings, const AttentionLayerParams& params,
                              const PairwiseMaps& maps) {
  std::size_t n = embeddings.rows(), d = embeddings.cols();
  if (params.dim() != d) {
    throw shape_error("attention weights sized " + shape_str(params.w_q.value().shape()) +
                      " do not match embeddings " + shape_str(embeddings.shape()));
  }
  auto [phi, psi] = materialize_maps_values(maps);
  Array q = matmul(embeddings, params.w_q.value());
  Array k = matmul(embeddings, params.w_k.value());
  Array v = matmul(embeddings, params.w_v.value());
  Array qn = rowwise_l2_normalize(q, kEpsFloor);
  Array kn = rowwise_l2_normalize(k, kEpsFloor);

  Array out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      denom += phi(i, m) + psi(i, m) * dot_row(qn, i, kn, m);
    }
    if (denom <= 0.0) {
      throw contract_error("non-positive attention denominator at row " + std::to_string(i));
    }
    for (std::size_t c = 0; c < d; ++c) {
      double mix = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double w = phi(i, j) + psi(i, j) * dot_row(qn, i, kn, j);
        mix += w * v(j, c);
      }
      out(i, c) = (1.0 - params.eta) * embeddings(i, c) + params.eta * mix / denom;
    }
  }
  return out;
}

namespace {

Var attention_head(const Var& h_slice, const Var& q, const Var& k, const Var& v,
                   const Var& phi, const Var& psi, double eta) {
  Var qn = rowwise_l2_normalize(q, kEpsFloor);
  Var kn = rowwise_l2_normalize(k, kEpsFloor);
  Var scores = matmul(qn, transpose(kn));
  Var w = add(phi, mul(psi, scores));
  Var den = row_sum(w);
  for (std::size_t i = 0; i < den.value().rows(); ++i) {
    if (den.value()(i, 0) <= 0.0) {
      throw contract_error("non-positive attention denominator at row " + std::to_string(i));
    }
  }
  Var mixed = mul_colvec(matmul(w, v), recip_floor(den, kEpsFloor));
  return add(scale(h_slice, 1.0 - eta), scale(mixed, eta));
}

}  // namespace

Var attention_step_matrix(const Var& embeddings, const AttentionLayerParams& params,
                          const PairwiseMaps& maps, std::size_t num_heads) {
  std::size_t d = embeddings.value().cols();
  if (params.dim() != d) {
    throw shape_error("attention weights sized " + shape_str(params.w_q.value().shape()) +
                      " do not match embeddings " + shape_str(embeddings.value().shape()));
  }
  if (num_heads == 0 || d % num_heads != 0) {
    throw contract_error("embedding dim " + std::to_string(d) + " not divisible into " +
                         std::to_string(num_heads) + " heads");
  }
  auto [phi, psi] = materialize_maps(maps);
  Var q = matmul(embeddings, params.w_q);
  Var k = matmul(embeddings, params.w_k);
  Var v = matmul(embeddings, params.w_v);
  if (num_heads == 1) {
    return attention_head(embeddings, q, k, v, phi, psi, params.eta);
  }
  std::size_t dh = d / num_heads;
  Var out;
  for (std::size_t h = 0; h < num_heads; ++h) {
    std::size_t b = h * dh, e = (h + 1) * dh;
    Var head = attention_head(slice_cols(embeddings, b, e), slice_cols(q, b, e),
                              slice_cols(k, b, e), slice_cols(v, b, e), phi, psi, params.eta);
    out = out.defined() ? concat_cols(out, head) : head;
  }
  return out;
}

std::vector<Var> unroll_encoder(const Var& initial, std::span<const AttentionLayerParams> steps,
                                const PairwiseMaps& maps, std::size_t horizon,
                                std::size_t num_heads) {
  if (horizon < 1) throw contract_error("unroll_encoder horizon must be >= 1");
  if (steps.empty()) throw contract_error("unroll_encoder needs at least one parameter set");
  if (steps.size() != 1 && steps.size() < horizon) {
    throw contract_error("unroll_encoder has " + std::to_string(steps.size()) +
                         " parameter sets for horizon " + std::to_string(horizon));
  }
  std::vector<Var> out;
  out.reserve(horizon);
  Var h = initial;
  for (std::size_t t = 0; t < horizon; ++t) {
    const AttentionLayerParams& p = steps.size() == 1 ? steps[0] : steps[t];
    h = rowwise_l2_normalize(attention_step_matrix(h, p, maps, num_heads), kEpsFloor);
    out.push_back(h);
  }
  return out;
}

}  // namespace painet
