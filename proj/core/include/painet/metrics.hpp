#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "painet/model.hpp"

namespace painet {

/// Final-frame per-particle mean squared displacement (the S2S metric).
double f_mse(const Trajectory& pred, const Trajectory& truth);
/// Mean over steps and particles of squared displacement (the S2T metric).
double a_mse(const Trajectory& pred, const Trajectory& truth);
/// Per-particle MSE at each step t=1..T.
std::vector<double> per_step_mse(const Trajectory& pred, const Trajectory& truth);

struct EvalReport {
  std::vector<double> per_step;  // t = 1..T, averaged over samples
  double final_mse = 0.0;
  double avg_mse = 0.0;
  double wall_time_ms = 0.0;
  std::size_t peak_bytes = 0;

  void write_csv(std::ostream& os) const;  // "step,mse"
};

EvalReport evaluate_model(const Model& model, const SampleSet& samples, std::size_t horizon);
/// Same aggregation for externally produced predictions (e.g. the linear
/// baseline); preds[i] pairs with samples[i].truth.
EvalReport evaluate_predictions(const std::vector<Trajectory>& preds, const SampleSet& samples);

struct ScalingRow {
  std::size_t n_particles;
  std::size_t horizon;
  double time_ms;
  std::size_t mem_bytes;
};

/// Inference wall time and array-allocation high-water mark over an (N, T)
/// grid, single-threaded, tied-step random model. Measures only; asserts
/// nothing about the trend.
std::vector<ScalingRow> scaling_probe(const ModelHyper& base, std::span<const std::size_t> n_list,
                                      std::span<const std::size_t> t_list, std::uint64_t seed);

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows);

}  // namespace painet
