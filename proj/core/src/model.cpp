#include "painet/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace painet {

Array SystemState::type_onehot(std::size_t n_types) const {
  Array z({types.size(), n_types});
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (types[i] >= n_types) {
      throw contract_error("particle type " + std::to_string(types[i]) + " out of range for " +
                           std::to_string(n_types) + " types");
    }
    z(i, types[i]) = 1.0;
  }
  return z;
}

namespace {

std::size_t encoder_input_dim(const ModelHyper& h) {
  return h.feat_dim + (h.paper_literal_encoder ? 6 : 2);
}

}  // namespace

Model::Model(const ModelHyper& hyper, Rng& rng, bool zero_coord_heads) : hyper_(hyper) {
  if (hyper_.embed_dim == 0 || hyper_.horizon == 0 || hyper_.decoder_layers == 0) {
    throw contract_error("model dimensions must be positive");
  }
  if (hyper_.num_heads == 0 || hyper_.embed_dim % hyper_.num_heads != 0) {
    throw contract_error("embed_dim must divide evenly into num_heads");
  }
  encoder_ = Mlp({encoder_input_dim(hyper_), hyper_.encoder_hidden, hyper_.embed_dim},
                 /*silu_output=*/false, rng);
  std::size_t n_steps = hyper_.tie_steps ? 1 : hyper_.horizon;
  for (std::size_t t = 0; t < n_steps; ++t) {
    attention_.push_back(AttentionLayerParams::init(hyper_.embed_dim, hyper_.eta, rng));
  }
  pairwise_ = PairwiseMaps::init(hyper_.n_types, rng);
  pairwise_.strict_eq9 = hyper_.strict_eq9;
  decoder_ = DecoderStack::init(hyper_.decoder_layers, hyper_.embed_dim, hyper_.edge_attr_dim,
                                hyper_.decoder_hidden, rng, zero_coord_heads,
                                hyper_.mean_aggregation);
}

Var Model::encode_initial(const SystemState& state) const {
  std::size_t n = state.n_particles();
  if (state.features.rows() != n && hyper_.feat_dim > 0) {
    throw shape_error("feature rows do not match particle count");
  }
  auto deg = state.graph.degrees();
  std::size_t in_dim = encoder_input_dim(hyper_);
  Array input({n, in_dim});
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t f = 0; f < hyper_.feat_dim; ++f) input(i, c++) = state.features(i, f);
    if (hyper_.paper_literal_encoder) {
      for (std::size_t k = 0; k < 3; ++k) input(i, c++) = state.positions(i, k);
      for (std::size_t k = 0; k < 3; ++k) input(i, c++) = state.velocities(i, k);
    } else {
      double v2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) v2 += state.velocities(i, k) * state.velocities(i, k);
      input(i, c++) = std::sqrt(v2);
      input(i, c++) = static_cast<double>(deg[i]);
    }
  }
  Var h = encoder_.forward(Var::constant(std::move(input)));
  return rowwise_l2_normalize(h, kEpsFloor);
}

std::vector<Var> Model::embeddings(const SystemState& state, std::size_t horizon) const {
  if (horizon == 0) throw contract_error("horizon must be >= 1");
  if (!hyper_.tie_steps && horizon > hyper_.horizon) {
    throw contract_error("model has per-step weights for horizon " +
                         std::to_string(hyper_.horizon) + ", cannot unroll " +
                         std::to_string(horizon) + " steps");
  }
  Var h0 = encode_initial(state);
  if (hyper_.disable_attention) {
    return std::vector<Var>(horizon, h0);
  }
  PairwiseMaps bound = pairwise_.bind(state.type_onehot(hyper_.n_types));
  return unroll_encoder(h0, std::span<const AttentionLayerParams>(attention_), bound, horizon,
                        hyper_.num_heads);
}

std::vector<Var> Model::predict_vars(const SystemState& state, std::size_t horizon) const {
  std::vector<Var> hs = embeddings(state, horizon);
  Var x0 = Var::constant(state.positions);
  Var v0 = Var::constant(state.velocities);
  return decode_trajectory(hs, x0, v0, state.graph, decoder_);
}

Trajectory Model::predict(const SystemState& state, std::size_t horizon) const {
  std::vector<Var> frames = predict_vars(state, horizon);
  Trajectory out;
  out.frames.reserve(frames.size());
  for (const Var& f : frames) out.frames.push_back(f.value());
  return out;
}

NamedParams Model::parameters() const {
  NamedParams out;
  encoder_.collect("encoder", out);
  for (std::size_t t = 0; t < attention_.size(); ++t) {
    std::string p = "attention." + std::to_string(t);
    out.emplace_back(p + ".wq", attention_[t].w_q);
    out.emplace_back(p + ".wk", attention_[t].w_k);
    out.emplace_back(p + ".wv", attention_[t].w_v);
  }
  out.emplace_back("pairwise.table_phi", pairwise_.table_phi);
  out.emplace_back("pairwise.table_psi", pairwise_.table_psi);
  out.emplace_back("pairwise.log_s1", pairwise_.log_s1);
  out.emplace_back("pairwise.log_s2", pairwise_.log_s2);
  for (std::size_t l = 0; l < decoder_.layers.size(); ++l) {
    std::string p = "decoder." + std::to_string(l);
    decoder_.layers[l].phi_m.collect(p + ".phi_m", out);
    decoder_.layers[l].phi_h.collect(p + ".phi_h", out);
    decoder_.layers[l].phi_x.collect(p + ".phi_x", out);
  }
  decoder_.velocity_head.collect("decoder.velocity", out);
  return out;
}

// ---------------------------------------------------------------------------
// serialization: magic "PAIN", u32 version, hyper block, named tensors

namespace {

constexpr char kMagic[4] = {'P', 'A', 'I', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw io_error("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw io_error("model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::uint8_t pack_flags(const ModelHyper& h) {
  std::uint8_t f = 0;
  if (h.tie_steps) f |= 1;
  if (h.strict_eq9) f |= 2;
  if (h.mean_aggregation) f |= 4;
  if (h.paper_literal_encoder) f |= 8;
  if (h.disable_attention) f |= 16;
  return f;
}

void unpack_flags(std::uint8_t f, ModelHyper& h) {
  h.tie_steps = f & 1;
  h.strict_eq9 = f & 2;
  h.mean_aggregation = f & 4;
  h.paper_literal_encoder = f & 8;
  h.disable_attention = f & 16;
}

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u32(os, kFormatVersion);
  put_u64(os, hyper_.embed_dim);
  put_u64(os, hyper_.horizon);
  put_u64(os, hyper_.decoder_layers);
  put_u64(os, hyper_.num_heads);
  put_u64(os, hyper_.n_types);
  put_u64(os, hyper_.feat_dim);
  put_u64(os, hyper_.edge_attr_dim);
  put_u64(os, hyper_.encoder_hidden);
  put_u64(os, hyper_.decoder_hidden);
  put_f64(os, hyper_.eta);
  put_f64(os, hyper_.learning_rate);
  put_f64(os, hyper_.weight_decay);
  put_u32(os, pack_flags(hyper_));

  NamedParams params = parameters();
  put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, var] : params) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const Array& a = var.value();
    put_u32(os, static_cast<std::uint32_t>(a.ndim()));
    for (std::size_t e : a.shape()) put_u64(os, e);
    for (std::size_t i = 0; i < a.numel(); ++i) put_f64(os, a[i]);
  }
  if (!os) throw io_error("write failure on " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw io_error(path + " is not a painet model file (bad magic)");
  }
  std::uint32_t version = get_u32(is);
  if (version > kFormatVersion) {
    throw io_error("model format version " + std::to_string(version) +
                   " is newer than supported version " + std::to_string(kFormatVersion));
  }
  ModelHyper h;
  h.embed_dim = get_u64(is);
  h.horizon = get_u64(is);
  h.decoder_layers = get_u64(is);
  h.num_heads = get_u64(is);
  h.n_types = get_u64(is);
  h.feat_dim = get_u64(is);
  h.edge_attr_dim = get_u64(is);
  h.encoder_hidden = get_u64(is);
  h.decoder_hidden = get_u64(is);
  h.eta = get_f64(is);
  h.learning_rate = get_f64(is);
  h.weight_decay = get_f64(is);
  unpack_flags(static_cast<std::uint8_t>(get_u32(is)), h);

  Rng scratch(0);
  Model model(h, scratch);
  NamedParams params = model.parameters();

  std::uint32_t n_params = get_u32(is);
  if (n_params != params.size()) {
    throw io_error("model file lists " + std::to_string(n_params) + " tensors, expected " +
                   std::to_string(params.size()));
  }
  for (std::uint32_t p = 0; p < n_params; ++p) {
    std::uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw io_error("model file truncated");
    if (name != params[p].first) {
      throw io_error("unexpected tensor '" + name + "', wanted '" + params[p].first + "'");
    }
    std::uint32_t rank = get_u32(is);
    Shape shape(rank);
    for (std::uint32_t r = 0; r < rank; ++r) shape[r] = get_u64(is);
    if (shape != params[p].second.value().shape()) {
      throw io_error("tensor '" + name + "' has shape " + shape_str(shape) + ", expected " +
                     shape_str(params[p].second.value().shape()));
    }
    Array a(shape);
    for (std::size_t i = 0; i < a.numel(); ++i) a[i] = get_f64(is);
    params[p].second.set_value(std::move(a));
  }
  return model;
}

// ---------------------------------------------------------------------------
// losses and training

double trajectory_loss(const Trajectory& pred, const Trajectory& truth) {
  if (pred.n_steps() != truth.n_steps()) {
    throw shape_error("trajectory length mismatch: " + std::to_string(pred.n_steps()) + " vs " +
                      std::to_string(truth.n_steps()));
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < pred.n_steps(); ++t) {
    if (!pred.frames[t].same_shape(truth.frames[t])) {
      throw shape_error("frame " + std::to_string(t) + " shape mismatch");
    }
    loss += frobenius_sq(sub(pred.frames[t], truth.frames[t]));
  }
  return loss;
}

Var trajectory_loss_var(const std::vector<Var>& pred_frames, const Trajectory& truth) {
  if (pred_frames.size() != truth.n_steps()) {
    throw shape_error("trajectory length mismatch: " + std::to_string(pred_frames.size()) +
                      " vs " + std::to_string(truth.n_steps()));
  }
  Var loss;
  for (std::size_t t = 0; t < pred_frames.size(); ++t) {
    Var term = sqnorm(sub(pred_frames[t], Var::constant(truth.frames[t])));
    loss = loss.defined() ? add(loss, term) : term;
  }
  return loss;
}

double a_mse_value(const Trajectory& pred, const Trajectory& truth) {
  double total = trajectory_loss(pred, truth);
  double n = static_cast<double>(truth.frames.front().rows());
  double t = static_cast<double>(truth.n_steps());
  return total / (n * t);
}

namespace {

struct AdamState {
  std::vector<Array> m;
  std::vector<Array> v;
  std::size_t step = 0;
};

void adam_update(NamedParams& params, const std::vector<Array>& grads, AdamState& state,
                 double lr, double weight_decay) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++state.step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Array theta = params[p].second.value();
    Array& m = state.m[p];
    Array& v = state.v[p];
    for (std::size_t i = 0; i < theta.numel(); ++i) {
      double g = grads[p][i] + weight_decay * theta[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
    params[p].second.set_value(std::move(theta));
  }
}

double validation_a_mse(const Model& model, const SampleSet& val) {
  double total = 0.0;
  for (const Sample& s : val) {
    Trajectory pred = model.predict(s.state, s.truth.n_steps());
    total += a_mse_value(pred, s.truth);
  }
  return total / static_cast<double>(val.size());
}

}  // namespace

TrainResult train(Model& model, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg) {
  if (train_set.empty()) throw contract_error("training set is empty");
  if (cfg.epochs == 0) throw contract_error("epochs must be >= 1");

  NamedParams params = model.parameters();
  AdamState adam;
  adam.m.reserve(params.size());
  adam.v.reserve(params.size());
  for (const auto& [name, var] : params) {
    adam.m.emplace_back(var.value().shape());
    adam.v.emplace_back(var.value().shape());
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Array> best_params;
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(start + cfg.batch_size, order.size());
      std::vector<Array> grad_acc;
      grad_acc.reserve(params.size());
      for (const auto& [name, var] : params) grad_acc.emplace_back(var.value().shape());

      for (std::size_t k = start; k < stop; ++k) {
        const Sample& s = train_set[order[k]];
        std::vector<Var> pred = model.predict_vars(s.state, s.truth.n_steps());
        Var loss = trajectory_loss_var(pred, s.truth);
        double lv = loss.value().scalar_value();
        if (!std::isfinite(lv)) {
          throw numeric_error(
              "training loss became non-finite at epoch " + std::to_string(epoch) +
              "; try a smaller learning rate (current " + std::to_string(cfg.learning_rate) +
              ")");
        }
        epoch_loss += lv;
        Gradients grads = backward(loss);
        for (std::size_t p = 0; p < params.size(); ++p) {
          Array g = grads.get_or_zero(params[p].second);
          for (std::size_t i = 0; i < g.numel(); ++i) grad_acc[p][i] += g[i];
        }
      }
      double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grad_acc)
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= inv_batch;
      adam_update(params, grad_acc, adam, cfg.learning_rate, cfg.weight_decay);
    }
    epoch_loss /= static_cast<double>(train_set.size());
    result.train_curve.push_back(epoch_loss);

    double val_metric = val_set.empty() ? epoch_loss : validation_a_mse(model, val_set);
    result.val_curve.push_back(val_metric);
    if (cfg.on_epoch) cfg.on_epoch(epoch, epoch_loss, val_metric);

    if (val_metric < best_val) {
      best_val = val_metric;
      result.best_epoch = epoch;
      since_best = 0;
      best_params.clear();
      for (const auto& [name, var] : params) best_params.push_back(var.value());
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  for (std::size_t p = 0; p < params.size(); ++p) {
    params[p].second.set_value(best_params[p]);
  }
  result.best_val = best_val;
  return result;
}

}  // namespace painet
