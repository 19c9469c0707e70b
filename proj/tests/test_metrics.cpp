#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "painet/geometry.hpp"
#include "painet/metrics.hpp"
#include "painet/verify.hpp"

using namespace painet;

namespace {

Trajectory traj_from(std::vector<Array> frames) {
  Trajectory t;
  t.frames = std::move(frames);
  return t;
}

}  // namespace

TEST_CASE("f_mse closed forms") {
  Rng rng(1);
  Array f = rng.gaussian_array({4, 3});
  Trajectory truth = traj_from({f});
  CHECK(f_mse(truth, truth) == 0.0);

  Array off = f;
  for (std::size_t i = 0; i < off.numel(); ++i) off[i] += 0.3;
  CHECK(f_mse(traj_from({off}), truth) == doctest::Approx(3 * 0.3 * 0.3).epsilon(1e-12));

  Trajectory p = traj_from({Array{{1, 0, 0}, {0, 2, 0}}});
  Trajectory q = traj_from({Array{{0, 0, 0}, {0, 0, 0}}});
  // (1 + 4) / 2
  CHECK(f_mse(p, q) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("a_mse reduces to f_mse at horizon one and averages otherwise") {
  Rng rng(2);
  Array a = rng.gaussian_array({3, 3});
  Array b = rng.gaussian_array({3, 3});
  Trajectory p = traj_from({a});
  Trajectory q = traj_from({b});
  CHECK(a_mse(p, q) == doctest::Approx(f_mse(p, q)).epsilon(1e-14));

  Trajectory p2 = traj_from({Array{{1, 0, 0}, {1, 0, 0}}, Array{{0, 0, 0}, {0, 0, 0}}});
  Trajectory q2 = traj_from({Array{{0, 0, 0}, {0, 0, 0}}, Array{{0, 2, 0}, {0, 0, 0}}});
  // step MSEs: (1+1)/2 = 1 and 4/2 = 2; average 1.5
  CHECK(a_mse(p2, q2) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(a_mse(p2, p2) == 0.0);
}

TEST_CASE("a_mse is invariant under a common permutation") {
  Rng rng(3);
  Trajectory p = traj_from({rng.gaussian_array({6, 3}), rng.gaussian_array({6, 3})});
  Trajectory q = traj_from({rng.gaussian_array({6, 3}), rng.gaussian_array({6, 3})});
  Permutation perm = Permutation::random(6, rng);
  Trajectory pp = traj_from({perm.apply_rows(p.frames[0]), perm.apply_rows(p.frames[1])});
  Trajectory qq = traj_from({perm.apply_rows(q.frames[0]), perm.apply_rows(q.frames[1])});
  CHECK(a_mse(pp, qq) == doctest::Approx(a_mse(p, q)).epsilon(1e-13));
}

TEST_CASE("report invariants tie the summary values to the per-step list") {
  ModelHyper hyper;
  hyper.embed_dim = 8;
  hyper.horizon = 3;
  hyper.decoder_layers = 1;
  hyper.n_types = 2;
  hyper.feat_dim = 2;
  hyper.edge_attr_dim = 1;
  hyper.encoder_hidden = 8;
  hyper.decoder_hidden = 8;
  Rng rng(4);
  Model model(hyper, rng, /*zero_coord_heads=*/false);

  SampleSet samples;
  for (int s = 0; s < 3; ++s) {
    Sample smp;
    smp.state = verify::random_system(5, hyper, rng);
    for (std::size_t t = 0; t < hyper.horizon; ++t) {
      smp.truth.frames.push_back(add(smp.state.positions, rng.gaussian_array({5, 3}, 0.1)));
    }
    samples.push_back(std::move(smp));
  }
  EvalReport rep = evaluate_model(model, samples, hyper.horizon);
  REQUIRE(rep.per_step.size() == hyper.horizon);
  double mean = 0.0;
  for (double v : rep.per_step) mean += v;
  mean /= static_cast<double>(rep.per_step.size());
  CHECK(std::fabs(rep.avg_mse - mean) <= 1e-12);
  CHECK(rep.final_mse == rep.per_step.back());
  CHECK(rep.wall_time_ms > 0.0);
  CHECK(rep.peak_bytes > 0);

  std::ostringstream os;
  rep.write_csv(os);
  CHECK(os.str().rfind("step,mse\n", 0) == 0);
}

TEST_CASE("scaling probe emits one row per grid cell and tracks memory") {
  ModelHyper hyper;
  hyper.embed_dim = 8;
  hyper.horizon = 4;
  hyper.decoder_layers = 1;
  hyper.n_types = 2;
  hyper.feat_dim = 2;
  hyper.edge_attr_dim = 1;
  hyper.encoder_hidden = 8;
  hyper.decoder_hidden = 8;

  std::vector<std::size_t> single_n{8}, single_t{2};
  auto one = scaling_probe(hyper, single_n, single_t, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].n_particles == 8);
  CHECK(one[0].horizon == 2);
  CHECK(one[0].time_ms > 0.0);

  std::vector<std::size_t> ns{4, 8, 16}, ts{2, 4};
  auto rows = scaling_probe(hyper, ns, ts, 1);
  REQUIRE(rows.size() == 6);
  // allocation high-water mark grows with the particle count (deterministic)
  CHECK(rows[0].mem_bytes <= rows[2].mem_bytes);
  CHECK(rows[2].mem_bytes <= rows[4].mem_bytes);

  std::ostringstream os;
  write_scaling_csv(os, rows);
  CHECK(os.str().rfind("N,T,time_ms,mem_bytes\n", 0) == 0);
}
