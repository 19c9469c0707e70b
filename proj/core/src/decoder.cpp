#include "painet/decoder.hpp"

namespace painet {

ObservedGraph::ObservedGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> e,
                             Array attrs)
    : n_nodes(n), edges(std::move(e)), edge_attrs(std::move(attrs)) {
  if (!edge_attrs.empty() && edge_attrs.rows() != edges.size()) {
    throw shape_error("edge attribute rows " + std::to_string(edge_attrs.rows()) +
                      " do not match edge count " + std::to_string(edges.size()));
  }
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw graph_error("edge (" + std::to_string(i) + "," + std::to_string(j) +
                        ") references a node outside 0.." + std::to_string(n - 1));
    }
    if (i == j) throw graph_error("self-loop at node " + std::to_string(i));
  }
}

ObservedGraph ObservedGraph::undirected(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const Array& pair_attrs) {
  std::vector<std::pair<std::size_t, std::size_t>> directed;
  directed.reserve(pairs.size() * 2);
  std::size_t d_e = pair_attrs.empty() ? 0 : pair_attrs.cols();
  Array attrs({pairs.size() * 2, d_e});
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    directed.emplace_back(pairs[p].first, pairs[p].second);
    directed.emplace_back(pairs[p].second, pairs[p].first);
    for (std::size_t c = 0; c < d_e; ++c) {
      attrs(2 * p, c) = pair_attrs(p, c);
      attrs(2 * p + 1, c) = pair_attrs(p, c);
    }
  }
  return ObservedGraph(n, std::move(directed), std::move(attrs));
}

std::vector<std::size_t> ObservedGraph::degrees() const {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto& [i, j] : edges) {
    (void)j;
    ++deg[i];
  }
  return deg;
}

EgnnLayerParams EgnnLayerParams::init(std::size_t d, std::size_t attr_dim, std::size_t hidden,
                                      Rng& rng, bool zero_coord_head, bool mean_aggregation) {
  EgnnLayerParams p;
  p.phi_m = Mlp({2 * d + 1 + attr_dim, hidden, d}, /*silu_output=*/true, rng);
  p.phi_h = Mlp({2 * d, hidden, d}, /*silu_output=*/false, rng);
  p.phi_x = Mlp({d, hidden, 1}, /*silu_output=*/false, rng);
  if (zero_coord_head) {
    p.phi_x.zero_last_layer();
  } else {
    p.phi_x.scale_last_layer(0.1);
  }
  p.mean_aggregation = mean_aggregation;
  return p;
}

namespace {

/// 1/deg column (deg floored at 1) for mean aggregation.
Var inverse_degree_column(const ObservedGraph& graph) {
  auto deg = graph.degrees();
  Array inv({graph.n_nodes, 1});
  for (std::size_t i = 0; i < graph.n_nodes; ++i) {
    inv(i, 0) = 1.0 / static_cast<double>(deg[i] == 0 ? 1 : deg[i]);
  }
  return Var::constant(std::move(inv));
}

}  // namespace

std::pair<Var, Var> egnn_layer(const Var& positions, const Var& embeddings,
                               const ObservedGraph& graph, const EgnnLayerParams& params) {
  std::size_t n = graph.n_nodes;
  if (positions.value().rows() != n || embeddings.value().rows() != n) {
    throw shape_error("graph has " + std::to_string(n) + " nodes but positions are " +
                      shape_str(positions.value().shape()) + " and embeddings " +
                      shape_str(embeddings.value().shape()));
  }
  std::size_t d = embeddings.value().cols();

  if (graph.edges.empty()) {
    Var zero_msg = Var::constant(Array({n, d}));
    Var h_next = params.phi_h.forward(concat_cols(embeddings, zero_msg));
    return {positions, h_next};
  }

  std::vector<std::size_t> recv(graph.edges.size()), send(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    recv[e] = graph.edges[e].first;
    send[e] = graph.edges[e].second;
  }

  Var xi = gather_rows(positions, recv);
  Var xj = gather_rows(positions, send);
  Var rel = sub(xi, xj);
  Var sqdist = row_sum(mul(rel, rel));

  Var msg_in = concat_cols(concat_cols(gather_rows(embeddings, recv),
                                       gather_rows(embeddings, send)),
                           sqdist);
  if (graph.attr_dim() > 0) {
    msg_in = concat_cols(msg_in, Var::constant(graph.edge_attrs));
  }
  Var messages = params.phi_m.forward(msg_in);

  Var coord_coef = params.phi_x.forward(messages);
  Var dx = scatter_add_rows(mul_colvec(rel, coord_coef), recv, n);
  Var msg_sum = scatter_add_rows(messages, recv, n);
  if (params.mean_aggregation) {
    Var inv_deg = inverse_degree_column(graph);
    dx = mul_colvec(dx, inv_deg);
    msg_sum = mul_colvec(msg_sum, inv_deg);
  }

  Var x_next = add(positions, dx);
  Var h_next = params.phi_h.forward(concat_cols(embeddings, msg_sum));
  return {x_next, h_next};
}

DecoderStack DecoderStack::init(std::size_t depth, std::size_t d, std::size_t attr_dim,
                                std::size_t hidden, Rng& rng, bool zero_coord_heads,
                                bool mean_aggregation) {
  if (depth < 1) throw contract_error("decoder needs at least one layer");
  DecoderStack s;
  for (std::size_t l = 0; l < depth; ++l) {
    s.layers.push_back(
        EgnnLayerParams::init(d, attr_dim, hidden, rng, zero_coord_heads, mean_aggregation));
  }
  s.velocity_head = Mlp({d, hidden, 1}, /*silu_output=*/false, rng);
  if (zero_coord_heads) {
    s.velocity_head.zero_last_layer();
  } else {
    s.velocity_head.scale_last_layer(0.1);
  }
  return s;
}

Var decode_step(const Var& embeddings, const Var& initial_positions,
                const Var& initial_velocities, const ObservedGraph& graph,
                const DecoderStack& stack) {
  if (stack.layers.empty()) throw contract_error("decode_step on empty decoder stack");
  // velocity pathway: equivariant because v rotates with Q and ignores g
  Var vel_coef = stack.velocity_head.forward(embeddings);
  Var x = add(initial_positions, mul_colvec(initial_velocities, vel_coef));
  Var h = embeddings;
  for (const EgnnLayerParams& layer : stack.layers) {
    auto [x_next, h_next] = egnn_layer(x, h, graph, layer);
    x = x_next;
    h = h_next;
  }
  return x;  // decoder-side embeddings are discarded after the last layer
}

std::vector<Var> decode_trajectory(const std::vector<Var>& embedding_seq,
                                   const Var& initial_positions, const Var& initial_velocities,
                                   const ObservedGraph& graph, const DecoderStack& stack) {
  if (embedding_seq.empty()) throw contract_error("decode_trajectory needs at least one step");
  std::vector<Var> frames;
  frames.reserve(embedding_seq.size());
  for (const Var& h : embedding_seq) {
    frames.push_back(decode_step(h, initial_positions, initial_velocities, graph, stack));
  }
  return frames;
}

}  // namespace painet
