#include "painet/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace painet {

std::vector<double> per_step_mse(const Trajectory& pred, const Trajectory& truth) {
  if (pred.n_steps() != truth.n_steps()) {
    throw shape_error("trajectory length mismatch: " + std::to_string(pred.n_steps()) + " vs " +
                      std::to_string(truth.n_steps()));
  }
  std::vector<double> out;
  out.reserve(pred.n_steps());
  for (std::size_t t = 0; t < pred.n_steps(); ++t) {
    if (!pred.frames[t].same_shape(truth.frames[t])) {
      throw shape_error("frame " + std::to_string(t) + " shape mismatch: " +
                        shape_str(pred.frames[t].shape()) + " vs " +
                        shape_str(truth.frames[t].shape()));
    }
    double n = static_cast<double>(truth.frames[t].rows());
    out.push_back(frobenius_sq(sub(pred.frames[t], truth.frames[t])) / n);
  }
  return out;
}

double f_mse(const Trajectory& pred, const Trajectory& truth) {
  return per_step_mse(pred, truth).back();
}

double a_mse(const Trajectory& pred, const Trajectory& truth) {
  auto steps = per_step_mse(pred, truth);
  double s = 0.0;
  for (double v : steps) s += v;
  return s / static_cast<double>(steps.size());
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "step,mse\n";
  char buf[64];
  for (std::size_t t = 0; t < per_step.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", t + 1, per_step[t]);
    os << buf;
  }
}

EvalReport evaluate_predictions(const std::vector<Trajectory>& preds, const SampleSet& samples) {
  if (preds.size() != samples.size() || samples.empty()) {
    throw contract_error("need one prediction per sample (non-empty)");
  }
  EvalReport rep;
  rep.per_step.assign(preds.front().n_steps(), 0.0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    auto steps = per_step_mse(preds[s], samples[s].truth);
    if (steps.size() != rep.per_step.size()) {
      throw shape_error("inconsistent horizon across samples");
    }
    for (std::size_t t = 0; t < steps.size(); ++t) rep.per_step[t] += steps[t];
  }
  double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : rep.per_step) v *= inv;
  rep.final_mse = rep.per_step.back();
  double s = 0.0;
  for (double v : rep.per_step) s += v;
  rep.avg_mse = s / static_cast<double>(rep.per_step.size());
  return rep;
}

EvalReport evaluate_model(const Model& model, const SampleSet& samples, std::size_t horizon) {
  alloc_stats::reset_peak();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Trajectory> preds;
  preds.reserve(samples.size());
  for (const Sample& s : samples) preds.push_back(model.predict(s.state, horizon));
  auto t1 = std::chrono::steady_clock::now();
  EvalReport rep = evaluate_predictions(preds, samples);
  rep.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  rep.peak_bytes = alloc_stats::peak_bytes();
  return rep;
}

namespace {

/// Ring-graph random state for timing runs.
SystemState probe_state(std::size_t n, const ModelHyper& hyper, Rng& rng) {
  SystemState s;
  s.positions = rng.gaussian_array({n, 3});
  s.velocities = rng.gaussian_array({n, 3}, 0.1);
  s.features = rng.gaussian_array({n, hyper.feat_dim});
  s.types.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.types[i] = i % hyper.n_types;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n == 2) pairs.emplace_back(0, 1);
  if (n >= 3)
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
  s.graph = ObservedGraph::undirected(n, pairs, Array::full({pairs.size(), hyper.edge_attr_dim}, 1.0));
  return s;
}

}  // namespace

std::vector<ScalingRow> scaling_probe(const ModelHyper& base, std::span<const std::size_t> n_list,
                                      std::span<const std::size_t> t_list, std::uint64_t seed) {
  if (n_list.empty() || t_list.empty()) throw contract_error("scaling grid is empty");
  ModelHyper hyper = base;
  hyper.tie_steps = true;  // one weight set serves any horizon
  Rng rng(seed);
  Model model(hyper, rng);

  std::vector<ScalingRow> rows;
  for (std::size_t n : n_list) {
    SystemState state = probe_state(n, hyper, rng);
    for (std::size_t t : t_list) {
      model.predict(state, t);  // warm-up
      constexpr int kReps = 3;
      double best_ms = std::numeric_limits<double>::infinity();
      std::size_t peak = 0;
      for (int rep = 0; rep < kReps; ++rep) {
        alloc_stats::reset_peak();
        auto t0 = std::chrono::steady_clock::now();
        model.predict(state, t);
        auto t1 = std::chrono::steady_clock::now();
        best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(t1 - t0).count());
        peak = std::max(peak, alloc_stats::peak_bytes());
      }
      rows.push_back({n, t, best_ms, peak});
    }
  }
  return rows;
}

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  os << "N,T,time_ms,mem_bytes\n";
  char buf[96];
  for (const ScalingRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.6g,%zu\n", r.n_particles, r.horizon, r.time_ms,
                  r.mem_bytes);
    os << buf;
  }
}

}  // namespace painet
