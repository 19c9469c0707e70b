#include "painet/energy.hpp"

#include <algorithm>
#include <cmath>

namespace painet {

namespace {

void validate_square(const Array& m, const char* name) {
  if (m.ndim() != 2 || m.rows() != m.cols()) {
    throw shape_error(std::string(name) + " must be square, got " + shape_str(m.shape()));
  }
}

}  // namespace

PotentialCoeffs::PotentialCoeffs(Array a, Array b)
    : coeff_a(std::move(a)), coeff_b(std::move(b)) {
  validate_square(coeff_a, "coeff_a");
  validate_square(coeff_b, "coeff_b");
  if (!coeff_a.same_shape(coeff_b)) {
    throw shape_error("coefficient matrices differ: " + shape_str(coeff_a.shape()) + " vs " +
                      shape_str(coeff_b.shape()));
  }
  std::size_t n = coeff_a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (coeff_b(i, j) <= 0.0) throw contract_error("potential requires b_ij > 0");
      if (coeff_a(i, j) <= 8.0 * coeff_b(i, j))
        throw contract_error("potential requires a_ij > 8 b_ij");
      if (coeff_a(i, j) != coeff_a(j, i) || coeff_b(i, j) != coeff_b(j, i))
        throw contract_error("potential coefficients must be symmetric");
    }
  }
}

PotentialCoeffs PotentialCoeffs::uniform(std::size_t n, double a, double b) {
  return PotentialCoeffs(Array::full({n, n}, a), Array::full({n, n}, b));
}

EnergyConfig::EnergyConfig(double lambda_, double eta_, PotentialCoeffs coeffs_)
    : lambda(lambda_), eta(eta_), coeffs(std::move(coeffs_)) {
  if (lambda <= 0.0) throw contract_error("energy lambda must be positive");
  if (eta <= 0.0 || eta >= 1.0) throw contract_error("energy eta must lie in (0,1)");
}

double evaluate_energy(const Array& embeddings, const Array& reference,
                       const EnergyConfig& cfg) {
  if (!embeddings.same_shape(reference)) {
    throw shape_error("energy shape mismatch: " + shape_str(embeddings.shape()) + " vs " +
                      shape_str(reference.shape()));
  }
  std::size_t n = embeddings.rows();
  if (cfg.coeffs.size() != n) {
    throw shape_error("coefficient size " + std::to_string(cfg.coeffs.size()) +
                      " does not match N=" + std::to_string(n));
  }
  double anchor = 0.0;
  for (std::size_t i = 0; i < n; ++i) anchor += row_sqdist(embeddings, i, reference, i);
  double pair = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double h2 = row_sqdist(embeddings, i, embeddings, j);
      pair += pair_penalty(cfg.coeffs.coeff_a(i, j), cfg.coeffs.coeff_b(i, j), h2);
    }
  }
  return anchor + cfg.lambda * pair;
}

Array theorem1_step(const Array& embeddings, const EnergyConfig& cfg) {
  if (!embeddings.all_finite()) throw contract_error("theorem1_step requires finite input");
  std::size_t n = embeddings.rows();
  std::size_t d = embeddings.cols();
  if (cfg.coeffs.size() != n) {
    throw shape_error("coefficient size " + std::to_string(cfg.coeffs.size()) +
                      " does not match N=" + std::to_string(n));
  }
  Array weights({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double h2 = row_sqdist(embeddings, i, embeddings, j);
      double w = pair_weight(cfg.coeffs.coeff_a(i, j), cfg.coeffs.coeff_b(i, j), h2);
      if (w <= 0.0) {
        throw contract_error(
            "non-positive mixing weight; coefficient invariant violated or embeddings not "
            "normalized (w=" + std::to_string(w) + " at pair " + std::to_string(i) + "," +
            std::to_string(j) + ")");
      }
      weights(i, j) = w;
    }
  }
  Array out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t m = 0; m < n; ++m) denom += weights(i, m);
    for (std::size_t c = 0; c < d; ++c) {
      double mix = 0.0;
      for (std::size_t j = 0; j < n; ++j) mix += weights(i, j) * embeddings(j, c);
      out(i, c) = (1.0 - cfg.eta) * embeddings(i, c) + cfg.eta * mix / denom;
    }
  }
  return out;
}

DescentReport certify_descent(const Array& initial_embeddings, const EnergyConfig& cfg,
                              std::size_t steps) {
  if (steps < 1) throw contract_error("certify_descent needs steps >= 1");
  DescentReport report;
  report.energies.reserve(steps + 1);
  Array h = initial_embeddings;
  report.energies.push_back(evaluate_energy(h, h, cfg));
  for (std::size_t t = 0; t < steps; ++t) {
    h = theorem1_step(h, cfg);
    report.energies.push_back(evaluate_energy(h, h, cfg));
  }
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < report.energies.size(); ++t) {
    report.max_violation =
        std::max(report.max_violation, report.energies[t + 1] - report.energies[t]);
  }
  return report;
}

void DescentReport::write_csv(std::ostream& os) const {
  os << "step,energy\n";
  char buf[64];
  for (std::size_t t = 0; t < energies.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", t, energies[t]);
    os << buf;
  }
}

}  // namespace painet
