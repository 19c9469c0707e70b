#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "painet/autodiff.hpp"
#include "painet/rng.hpp"

namespace painet {

/// Trainable weights of one all-pair attention step.
struct AttentionLayerParams {
  Var w_q, w_k, w_v;  // each dxd
  double eta;         // mixing rate in (0,1)

  static AttentionLayerParams init(std::size_t d, double eta, Rng& rng);
  std::size_t dim() const { return w_q.value().rows(); }
};

/// Type-dependent pairwise mapping machinery. The lookup tables and scales
/// are trainable and shared across systems; the one-hot assignment Z binds
/// them to a concrete particle set. Scales are stored as logs so s1, s2
/// stay positive under unconstrained updates.
struct PairwiseMaps {
  Var table_phi;   // ExE lookup logits
  Var table_psi;   // ExE lookup logits
  Var log_s1;      // {1}
  Var log_s2;      // {1}
  Array type_onehot;  // NxE, one-hot rows
  /// When set, skips the clamp that keeps max(Psi) below min(Phi). The
  /// clamped form guarantees positive mixing weights; the strict form is
  /// the literal parameterization, kept for ablation.
  bool strict_eq9 = false;

  static PairwiseMaps init(std::size_t n_types, Rng& rng);
  PairwiseMaps bind(Array type_onehot) const;
  std::size_t n_types() const { return table_phi.value().rows(); }
};

/// Materialized NxN weight matrices Phi = s1*sigmoid(Z E_phi Zt) and
/// Psi = s2*sigmoid(Z E_psi Zt); entries depend only on the type pair.
std::pair<Var, Var> materialize_maps(const PairwiseMaps& maps);

/// Plain-value view of the materialized maps (for oracles and tests).
std::pair<Array, Array> materialize_maps_values(const PairwiseMaps& maps);

/// Reference double-loop update. Oracle for the matrix form; not used in
/// the production path.
Array attention_step_pairwise(const Array& embeddings, const AttentionLayerParams& params,
                              const PairwiseMaps& maps);

/// Matrix-form update: H' = (1-eta) H + eta D^-1 (Phi V + (Psi . QnKnt) V).
/// Differentiable end to end; optional multi-head by feature slices with
/// shared Phi/Psi.
Var attention_step_matrix(const Var& embeddings, const AttentionLayerParams& params,
                          const PairwiseMaps& maps, std::size_t num_heads = 1);

/// T attention steps with per-step parameters (pass a single-element span
/// for tied weights); embeddings are re-normalized to the unit sphere after
/// each step. Returns H^(1)..H^(T).
std::vector<Var> unroll_encoder(const Var& initial, std::span<const AttentionLayerParams> steps,
                                const PairwiseMaps& maps, std::size_t horizon,
                                std::size_t num_heads = 1);

}  // namespace painet
