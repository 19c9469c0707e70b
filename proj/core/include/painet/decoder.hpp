#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "painet/nn.hpp"

namespace painet {

/// Observed interaction structure: directed edges (receiver, sender) with
/// per-edge attribute vectors. Undirected systems carry both directions.
struct ObservedGraph {
  std::size_t n_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Array edge_attrs;  // n_edges x attr_dim

  ObservedGraph() = default;
  ObservedGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> e, Array attrs);

  /// Builds the two directed edges per undirected pair, sharing attributes.
  static ObservedGraph undirected(std::size_t n,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                  const Array& pair_attrs);

  std::size_t n_edges() const { return edges.size(); }
  std::size_t attr_dim() const { return edge_attrs.empty() ? 0 : edge_attrs.cols(); }
  std::vector<std::size_t> degrees() const;
};

/// MLP bundle for one message-passing layer. The coordinate head phi_x ends
/// in a plain affine layer, zero-initialized by default so an untrained
/// stack is the identity on positions.
struct EgnnLayerParams {
  Mlp phi_m;  // (2d + 1 + d_e) -> hidden -> d, SiLU output
  Mlp phi_h;  // 2d -> hidden -> d
  Mlp phi_x;  // d -> hidden -> 1
  bool mean_aggregation = false;

  static EgnnLayerParams init(std::size_t d, std::size_t attr_dim, std::size_t hidden, Rng& rng,
                              bool zero_coord_head = true, bool mean_aggregation = false);
};

/// One EGNN layer (positions and embeddings); messages see only pairwise
/// squared distances and invariant features, position updates move along
/// relative vectors.
std::pair<Var, Var> egnn_layer(const Var& positions, const Var& embeddings,
                               const ObservedGraph& graph, const EgnnLayerParams& params);

/// Full decoder: L EGNN layers plus the first-layer velocity pathway
/// x_i += phi_v(h_i) * v_i.
struct DecoderStack {
  std::vector<EgnnLayerParams> layers;
  Mlp velocity_head;  // d -> hidden -> 1

  static DecoderStack init(std::size_t depth, std::size_t d, std::size_t attr_dim,
                           std::size_t hidden, Rng& rng, bool zero_coord_heads = true,
                           bool mean_aggregation = false);
  std::size_t depth() const { return layers.size(); }
};

/// Decode one time step from shared initial conditions.
Var decode_step(const Var& embeddings, const Var& initial_positions,
                const Var& initial_velocities, const ObservedGraph& graph,
                const DecoderStack& stack);

/// Per-step decoding from the same (X0, V0); steps are independent and
/// order-free, all sharing one stack.
std::vector<Var> decode_trajectory(const std::vector<Var>& embedding_seq,
                                   const Var& initial_positions, const Var& initial_velocities,
                                   const ObservedGraph& graph, const DecoderStack& stack);

}  // namespace painet
