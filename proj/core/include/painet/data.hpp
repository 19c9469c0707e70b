#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "painet/model.hpp"

namespace painet {

/// Spring network with an all-pair softened Coulomb channel. The observed
/// graph handed to the model carries only the spring edges; the Coulomb
/// structure is deliberately hidden from it.
struct SimConfig {
  std::size_t n_particles = 10;
  double spring_k = 0.5;
  double rest_length = 1.0;
  double coulomb_c = 0.2;
  std::vector<double> masses;  // empty = all 1.0
  double dt_sim = 0.01;
  std::size_t frames = 5;
  std::size_t stride = 40;
  std::size_t extra_springs = 2;  // chords beyond the ring
  std::uint64_t seed = 0;
  /// One charge per particle type; type of particle i is i % n_types.
  std::vector<double> type_charges = {1.0, 2.0};
  double init_noise = 0.1;
  double init_speed = 0.2;

  void validate() const;
  double frame_dt() const { return dt_sim * static_cast<double>(stride); }
  double softening() const { return 0.1 * rest_length; }
  std::size_t n_types() const { return type_charges.size(); }
  double mass(std::size_t i) const { return masses.empty() ? 1.0 : masses[i]; }
  double charge(std::size_t i) const { return type_charges[i % type_charges.size()]; }
};

struct SimResult {
  SystemState state;
  Trajectory trajectory;
  /// Diagnostics per captured frame (entry 0 is the initial state).
  std::vector<std::array<double, 3>> frame_momentum;
  std::vector<double> frame_energy;
};

/// Velocity-Verlet integration; positions subsampled by stride. Initial
/// conditions come from ic_seed, the spring topology from cfg.seed only,
/// so every sample of a dataset shares one graph.
SimResult simulate(const SimConfig& cfg, std::uint64_t ic_seed);
inline SimResult simulate(const SimConfig& cfg) { return simulate(cfg, cfg.seed); }

/// Integration from explicit initial conditions (same dynamics as
/// simulate); lets tests drive controlled configurations.
SimResult integrate(const SimConfig& cfg, const Array& positions, const Array& velocities);

/// The undirected spring pairs cfg induces (ring plus seeded chords).
std::vector<std::pair<std::size_t, std::size_t>> spring_pairs(const SimConfig& cfg);

/// Total mechanical energy (kinetic + spring + softened-Coulomb potential).
double mechanical_energy(const SimConfig& cfg,
                         const std::vector<std::pair<std::size_t, std::size_t>>& spring_pairs,
                         const Array& positions, const Array& velocities);

struct Dataset {
  SampleSet samples;
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  std::map<std::string, std::string> provenance;

  SampleSet subset(const std::vector<std::size_t>& idx) const;
  SampleSet train_set() const { return subset(train_idx); }
  SampleSet val_set() const { return subset(val_idx); }
  SampleSet test_set() const { return subset(test_idx); }
};

/// n_samples independent simulations from perturbed initial conditions and
/// a seeded shuffle split. Ratios must sum to 1.
Dataset build_dataset(const SimConfig& cfg, std::size_t n_samples,
                      const std::array<double, 3>& split_ratios, std::uint64_t seed);

/// Inertial extrapolation x(t) = x0 + v0 * t * dt.
Trajectory linear_baseline(const SystemState& state, std::size_t horizon, double dt);

/// Line-delimited text format; floats printed with 17 significant digits so
/// the round trip is bit-exact.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace painet
