#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "painet/model.hpp"

namespace painet::verify {

/// Outcome of one property suite. `worst` is the largest observed violation
/// of the property (signed where that makes sense), compared against
/// `tolerance`.
struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  std::string summary_line() const;
};

/// Theorem-1 descent over random unit-sphere embeddings (N<=16, d<=8,
/// eta=0.1, lambda=1, a=1, b=0.1); worst = max energy increase.
CheckResult descent_suite(std::size_t trials, double tolerance, std::uint64_t seed);

/// End-to-end SE(3) commutation of predict under random rigid transforms;
/// worst = max-abs coordinate deviation.
CheckResult equivariance_suite(std::size_t trials, double tolerance, std::uint64_t seed);

/// Invariance of the attention-side embeddings under rigid transforms.
CheckResult embedding_invariance_suite(std::size_t trials, double tolerance, std::uint64_t seed);

/// Relabeled inputs must produce identically relabeled outputs.
CheckResult permutation_suite(std::size_t trials, double tolerance, std::uint64_t seed);

/// Matrix-form vs pairwise-form attention agreement on random instances.
CheckResult matrix_pairwise_suite(std::size_t trials, double tolerance, std::uint64_t seed);

/// Central-finite-difference check of every parameter gradient through the
/// full pipeline on a tiny instance (N=4, T=2, d=8, L=2); worst = max
/// relative error.
CheckResult gradient_suite(double tolerance, std::uint64_t seed);

/// Runs one named suite ("descent", "equivariance", "gradients",
/// "matrix-vs-pairwise", or "all"). Negative trials/tolerance pick the
/// suite defaults.
std::vector<CheckResult> run_suites(const std::string& suite, long trials, double tolerance,
                                    std::uint64_t seed);

/// Random system on a ring graph (shared by the suites and tests).
SystemState random_system(std::size_t n_particles, const ModelHyper& hyper, Rng& rng);

}  // namespace painet::verify
