#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "painet/array.hpp"

namespace painet {

/// Coefficients of the quadratic pair potential rho(h2) = a*h2 - b*h4.
/// Requires b > 0 and a > 8b so the derivative f(h2) = a - 2b*h2 stays
/// positive on the unit sphere (where h2 <= 4), plus symmetry of both
/// matrices. Named coeff_* to keep them apart from decoder edge attributes.
struct PotentialCoeffs {
  Array coeff_a;  // NxN
  Array coeff_b;  // NxN

  PotentialCoeffs(Array a, Array b);
  static PotentialCoeffs uniform(std::size_t n, double a, double b);

  std::size_t size() const { return coeff_a.rows(); }
};

struct EnergyConfig {
  double lambda;
  double eta;
  PotentialCoeffs coeffs;

  EnergyConfig(double lambda_, double eta_, PotentialCoeffs coeffs_);
};

/// Pair penalty rho(h2) and its derivative f(h2) for one coefficient pair.
inline double pair_penalty(double a, double b, double h2) { return a * h2 - b * h2 * h2; }
inline double pair_weight(double a, double b, double h2) { return a - 2.0 * b * h2; }

/// E(H, ref) = sum_i ||h_i - ref_i||^2 + lambda * sum_{i,j} rho_ij(||h_i - h_j||^2),
/// the double sum over all ordered pairs including i = j.
double evaluate_energy(const Array& embeddings, const Array& reference, const EnergyConfig& cfg);

/// One mixing step h_i' = (1-eta) h_i + eta * sum_j (w_ij / sum_m w_im) h_j
/// with w_ij = f_ij(||h_i - h_j||^2). Contract error if any w_ij <= 0.
Array theorem1_step(const Array& embeddings, const EnergyConfig& cfg);

/// Per-step energies E_t (each evaluated with the iterate anchored at
/// itself, matching the chained inequality the descent proof establishes)
/// plus the largest observed increase between consecutive steps.
struct DescentReport {
  std::vector<double> energies;  // length steps + 1
  double max_violation;          // max over t of E_{t+1} - E_t

  bool passed(double tol) const { return max_violation <= tol; }
  void write_csv(std::ostream& os) const;  // "step,energy"
};

DescentReport certify_descent(const Array& initial_embeddings, const EnergyConfig& cfg,
                              std::size_t steps);

}  // namespace painet
