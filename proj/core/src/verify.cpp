#include "painet/verify.hpp"

#include <cmath>
#include <cstdio>

#include "painet/energy.hpp"
#include "painet/geometry.hpp"

namespace painet::verify {

std::string CheckResult::summary_line() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: trials=%zu max_violation=%.6e tolerance=%.3e %s",
                name.c_str(), trials, worst, tolerance, pass ? "PASS" : "FAIL");
  return buf;
}

SystemState random_system(std::size_t n_particles, const ModelHyper& hyper, Rng& rng) {
  SystemState s;
  s.positions = rng.gaussian_array({n_particles, 3});
  s.velocities = rng.gaussian_array({n_particles, 3}, 0.3);
  s.features = rng.gaussian_array({n_particles, hyper.feat_dim});
  s.types.resize(n_particles);
  for (std::size_t i = 0; i < n_particles; ++i) s.types[i] = i % hyper.n_types;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_particles == 2) pairs.emplace_back(0, 1);
  if (n_particles >= 3) {
    for (std::size_t i = 0; i < n_particles; ++i) pairs.emplace_back(i, (i + 1) % n_particles);
  }
  Array attrs({pairs.size(), hyper.edge_attr_dim});
  for (std::size_t i = 0; i < attrs.numel(); ++i) attrs[i] = rng.uniform();
  s.graph = ObservedGraph::undirected(n_particles, pairs, attrs);
  return s;
}

namespace {

Array random_unit_rows(std::size_t n, std::size_t d, Rng& rng) {
  return rowwise_l2_normalize(rng.gaussian_array({n, d}), kEpsFloor);
}

ModelHyper verify_hyper() {
  ModelHyper h;
  h.embed_dim = 16;
  h.horizon = 3;
  h.decoder_layers = 2;
  h.num_heads = 2;
  h.n_types = 2;
  h.feat_dim = 2;
  h.edge_attr_dim = 1;
  h.encoder_hidden = 16;
  h.decoder_hidden = 16;
  h.eta = 0.5;
  return h;
}

SystemState transformed(const SystemState& s, const RigidTransform& t) {
  SystemState out = s;
  out.positions = apply(t, s.positions);
  out.velocities = apply_to_velocity(t, s.velocities);
  return out;
}

SystemState permuted(const SystemState& s, const Permutation& perm) {
  SystemState out;
  out.positions = perm.apply_rows(s.positions);
  out.velocities = perm.apply_rows(s.velocities);
  out.features = perm.apply_rows(s.features);
  out.types = perm.apply_values(s.types);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(s.graph.edges.size());
  for (const auto& [i, j] : s.graph.edges) {
    edges.emplace_back(perm.relabel(i), perm.relabel(j));
  }
  out.graph = ObservedGraph(s.graph.n_nodes, std::move(edges), s.graph.edge_attrs);
  return out;
}

}  // namespace

CheckResult descent_suite(std::size_t trials, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  CheckResult res{"descent", trials, -std::numeric_limits<double>::infinity(), tolerance, false};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::size_t n = 2 + rng.integer(15);  // N <= 16
    std::size_t d = 1 + rng.integer(8);   // d <= 8
    Array h0 = random_unit_rows(n, d, rng);
    EnergyConfig cfg(1.0, 0.1, PotentialCoeffs::uniform(n, 1.0, 0.1));
    DescentReport rep = certify_descent(h0, cfg, 20);
    res.worst = std::max(res.worst, rep.max_violation);
  }
  res.pass = res.worst <= tolerance;
  return res;
}

CheckResult equivariance_suite(std::size_t trials, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  ModelHyper hyper = verify_hyper();
  Model model(hyper, rng, /*zero_coord_heads=*/false);
  CheckResult res{"equivariance", trials, 0.0, tolerance, false};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    SystemState s = random_system(8 + rng.integer(8), hyper, rng);
    RigidTransform t = random_transform(rng, 2.0);
    Trajectory base = model.predict(s, hyper.horizon);
    Trajectory moved = model.predict(transformed(s, t), hyper.horizon);
    for (std::size_t f = 0; f < base.frames.size(); ++f) {
      res.worst = std::max(res.worst, max_abs_diff(moved.frames[f], apply(t, base.frames[f])));
    }
  }
  res.pass = res.worst <= tolerance;
  return res;
}

CheckResult embedding_invariance_suite(std::size_t trials, double tolerance,
                                       std::uint64_t seed) {
  Rng rng(seed);
  ModelHyper hyper = verify_hyper();
  Model model(hyper, rng, /*zero_coord_heads=*/false);
  CheckResult res{"embedding_invariance", trials, 0.0, tolerance, false};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    SystemState s = random_system(8 + rng.integer(8), hyper, rng);
    RigidTransform t = random_transform(rng, 2.0);
    auto base = model.embeddings(s, hyper.horizon);
    auto moved = model.embeddings(transformed(s, t), hyper.horizon);
    for (std::size_t k = 0; k < base.size(); ++k) {
      res.worst = std::max(res.worst, max_abs_diff(base[k].value(), moved[k].value()));
    }
  }
  res.pass = res.worst <= tolerance;
  return res;
}

CheckResult permutation_suite(std::size_t trials, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  ModelHyper hyper = verify_hyper();
  Model model(hyper, rng, /*zero_coord_heads=*/false);
  CheckResult res{"permutation", trials, 0.0, tolerance, false};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    SystemState s = random_system(6 + rng.integer(10), hyper, rng);
    Permutation perm = Permutation::random(s.n_particles(), rng);
    Trajectory base = model.predict(s, hyper.horizon);
    Trajectory relabeled = model.predict(permuted(s, perm), hyper.horizon);
    for (std::size_t f = 0; f < base.frames.size(); ++f) {
      res.worst = std::max(
          res.worst, max_abs_diff(relabeled.frames[f], perm.apply_rows(base.frames[f])));
    }
  }
  res.pass = res.worst <= tolerance;
  return res;
}

CheckResult matrix_pairwise_suite(std::size_t trials, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  CheckResult res{"matrix-vs-pairwise", trials, 0.0, tolerance, false};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::size_t n = 2 + rng.integer(31);  // N <= 32
    std::size_t d = 2 + rng.integer(15);  // d <= 16
    std::size_t n_types = 1 + rng.integer(3);
    Array h = random_unit_rows(n, d, rng);
    auto params = AttentionLayerParams::init(d, 0.1 + 0.8 * rng.uniform(), rng);
    PairwiseMaps maps = PairwiseMaps::init(n_types, rng);
    Array onehot({n, n_types});
    for (std::size_t i = 0; i < n; ++i) onehot(i, rng.integer(n_types)) = 1.0;
    PairwiseMaps bound = maps.bind(std::move(onehot));
    Array reference = attention_step_pairwise(h, params, bound);
    Var matrix = attention_step_matrix(Var::constant(h), params, bound);
    res.worst = std::max(res.worst, max_abs_diff(matrix.value(), reference));
  }
  res.pass = res.worst <= tolerance;
  return res;
}

CheckResult gradient_suite(double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  ModelHyper hyper;
  hyper.embed_dim = 8;
  hyper.horizon = 2;
  hyper.decoder_layers = 2;
  hyper.num_heads = 1;
  hyper.n_types = 2;
  hyper.feat_dim = 2;
  hyper.edge_attr_dim = 1;
  hyper.encoder_hidden = 8;
  hyper.decoder_hidden = 8;
  hyper.eta = 0.5;
  // random coordinate heads: zero heads would zero out whole gradient paths
  Model model(hyper, rng, /*zero_coord_heads=*/false);
  SystemState state = random_system(4, hyper, rng);
  // truth near the initial positions keeps the loss moderate, so the
  // finite-difference oracle is well above its rounding floor at this step
  Trajectory truth;
  truth.frames = {painet::add(state.positions, rng.gaussian_array({4, 3}, 0.3)),
                  painet::add(state.positions, rng.gaussian_array({4, 3}, 0.3))};

  auto loss_value = [&]() {
    return trajectory_loss_var(model.predict_vars(state, hyper.horizon), truth)
        .value()
        .scalar_value();
  };

  Gradients grads = backward(trajectory_loss_var(model.predict_vars(state, hyper.horizon), truth));

  // The central-difference oracle carries rounding noise of roughly
  // eps*|loss|/step (~1e-10 here), so components below the 1e-3 floor are
  // compared absolutely at tolerance*1e-3 instead of relatively.
  constexpr double step = 1e-4;
  CheckResult res{"gradients", 0, 0.0, tolerance, false};
  for (auto& [name, var] : model.parameters()) {
    Array analytic = grads.get_or_zero(var);
    Array theta = var.value();
    for (std::size_t i = 0; i < theta.numel(); ++i) {
      double keep = theta[i];
      theta[i] = keep + step;
      var.set_value(theta);
      double up = loss_value();
      theta[i] = keep - step;
      var.set_value(theta);
      double down = loss_value();
      theta[i] = keep;
      var.set_value(theta);
      double fd = (up - down) / (2.0 * step);
      double denom = std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-3});
      res.worst = std::max(res.worst, std::fabs(analytic[i] - fd) / denom);
      ++res.trials;
    }
  }
  res.pass = res.worst <= tolerance;
  return res;
}

std::vector<CheckResult> run_suites(const std::string& suite, long trials, double tolerance,
                                    std::uint64_t seed) {
  auto pick = [&](std::size_t def_trials, double def_tol) {
    return std::pair<std::size_t, double>{
        trials >= 0 ? static_cast<std::size_t>(trials) : def_trials,
        tolerance >= 0 ? tolerance : def_tol};
  };
  std::vector<CheckResult> out;
  bool all = suite == "all";
  bool known = all;
  if (all || suite == "descent") {
    auto [t, tol] = pick(100, 1e-9);
    out.push_back(descent_suite(t, tol, seed));
    known = true;
  }
  if (all || suite == "equivariance") {
    auto [t, tol] = pick(20, 1e-9);
    out.push_back(equivariance_suite(t, tol, seed));
    auto [t2, tol2] = pick(20, 1e-12);
    out.push_back(embedding_invariance_suite(t2, tol2, seed + 1));
    auto [t3, tol3] = pick(20, 1e-12);
    out.push_back(permutation_suite(t3, tol3, seed + 2));
    known = true;
  }
  if (all || suite == "matrix-vs-pairwise") {
    auto [t, tol] = pick(20, 1e-10);
    out.push_back(matrix_pairwise_suite(t, tol, seed));
    known = true;
  }
  if (all || suite == "gradients") {
    auto [t, tol] = pick(0, 1e-4);
    (void)t;
    out.push_back(gradient_suite(tol, seed));
    known = true;
  }
  if (!known) throw contract_error("unknown verify suite '" + suite + "'");
  return out;
}

}  // namespace painet::verify
