#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "painet/attention.hpp"
#include "painet/decoder.hpp"

namespace painet {

/// Architecture and optimizer hyperparameters; serialized with the model.
struct ModelHyper {
  std::size_t embed_dim = 32;       // d
  std::size_t horizon = 5;          // T
  std::size_t decoder_layers = 3;   // L
  std::size_t num_heads = 1;
  std::size_t n_types = 1;          // E
  std::size_t feat_dim = 0;         // d_f
  std::size_t edge_attr_dim = 0;    // d_e
  std::size_t encoder_hidden = 32;
  std::size_t decoder_hidden = 32;
  double eta = 0.5;
  double learning_rate = 5e-4;
  double weight_decay = 1e-15;
  bool tie_steps = false;
  bool strict_eq9 = false;
  bool mean_aggregation = false;
  /// Feeds raw coordinates into the input encoder (breaks invariance;
  /// ablation only).
  bool paper_literal_encoder = false;
  /// Pass-through encoder: every H^(t) equals H^(0) (ablation).
  bool disable_attention = false;
};

/// Snapshot of one system: the model input.
struct SystemState {
  Array positions;   // Nx3
  Array velocities;  // Nx3
  Array features;    // Nxd_f
  std::vector<std::size_t> types;
  ObservedGraph graph;

  std::size_t n_particles() const { return positions.rows(); }
  Array type_onehot(std::size_t n_types) const;
};

/// Ordered position frames; supervision target and prediction output.
struct Trajectory {
  std::vector<Array> frames;  // each Nx3
  double dt = 1.0;
  double start_time = 0.0;

  std::size_t n_steps() const { return frames.size(); }
};

struct Sample {
  SystemState state;
  Trajectory truth;
};
using SampleSet = std::vector<Sample>;

/// Full PAINET: invariant input encoder, attention unroll, parallel
/// equivariant decoder.
class Model {
 public:
  Model() = default;
  /// `zero_coord_heads=false` randomizes the coordinate/velocity heads
  /// (used by gradient checks, where zero heads would hide errors).
  Model(const ModelHyper& hyper, Rng& rng, bool zero_coord_heads = true);

  const ModelHyper& hyper() const { return hyper_; }

  /// H^(0) from rotation/translation-invariant per-particle scalars
  /// (features, speed, degree); identical under any rigid transform.
  Var encode_initial(const SystemState& state) const;
  /// H^(1)..H^(T) after the attention unroll.
  std::vector<Var> embeddings(const SystemState& state, std::size_t horizon) const;
  /// Differentiable predicted frames.
  std::vector<Var> predict_vars(const SystemState& state, std::size_t horizon) const;
  Trajectory predict(const SystemState& state, std::size_t horizon) const;

  NamedParams parameters() const;

  /// Versioned binary container; bit-exact round trip.
  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  ModelHyper hyper_;
  Mlp encoder_;
  std::vector<AttentionLayerParams> attention_;  // horizon entries, or 1 if tied
  PairwiseMaps pairwise_;                        // unbound; bound per system
  DecoderStack decoder_;
};

/// Unnormalized trajectory loss: sum over steps and particles of squared
/// position error.
double trajectory_loss(const Trajectory& pred, const Trajectory& truth);
Var trajectory_loss_var(const std::vector<Var>& pred_frames, const Trajectory& truth);

/// Normalized per-particle per-step error used for validation.
double a_mse_value(const Trajectory& pred, const Trajectory& truth);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t patience = 50;
  std::size_t batch_size = 8;
  double learning_rate = 5e-4;
  double weight_decay = 1e-15;
  std::uint64_t seed = 0;
  std::function<void(std::size_t epoch, double train_loss, double val_metric)> on_epoch;
};

struct TrainResult {
  std::vector<double> train_curve;  // mean per-sample loss per epoch
  std::vector<double> val_curve;    // validation A-MSE per epoch
  std::size_t best_epoch = 0;
  double best_val = 0.0;
};

/// Minibatch Adam with weight decay and early stopping on validation
/// A-MSE; the model is left at its best-validation parameters. Aborts with
/// a numeric error (suggesting a smaller learning rate) if the loss goes
/// non-finite.
TrainResult train(Model& model, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg);

}  // namespace painet
