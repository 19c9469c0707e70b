#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "painet/data.hpp"
#include "painet/metrics.hpp"

using namespace painet;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("force-free systems fly in straight lines") {
  SimConfig cfg;
  cfg.n_particles = 4;
  cfg.spring_k = 0.0;
  cfg.coulomb_c = 0.0;
  cfg.frames = 5;
  cfg.stride = 40;
  cfg.dt_sim = 0.01;
  SimResult r = simulate(cfg, 3);
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    double time = (t + 1) * cfg.frame_dt();
    for (std::size_t i = 0; i < cfg.n_particles; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        double expected = r.state.positions(i, k) + r.state.velocities(i, k) * time;
        CHECK(std::fabs(r.trajectory.frames[t](i, k) - expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("spring-pair oscillation period matches the analytic value") {
  // two unit masses, one spring: relative coordinate has period 2*pi*sqrt(m/(2k))
  SimConfig cfg;
  cfg.n_particles = 2;
  cfg.spring_k = 0.5;
  cfg.rest_length = 1.0;
  cfg.coulomb_c = 0.0;
  cfg.dt_sim = 0.01;
  cfg.stride = 1;
  cfg.frames = 4000;  // several periods at dt 0.01

  Array x0({2, 3});
  x0(0, 0) = -(1.0 + 0.02) / 2.0;
  x0(1, 0) = (1.0 + 0.02) / 2.0;
  Array v0({2, 3});

  auto measure_period = [&](const SimConfig& c) {
    SimResult r = integrate(c, x0, v0);
    // upward zero crossings of (separation - rest length), linearly interpolated
    std::vector<double> crossings;
    double prev = 0.02;  // at t=0 the spring is stretched
    for (std::size_t f = 0; f < r.trajectory.frames.size(); ++f) {
      const Array& fr = r.trajectory.frames[f];
      double sep = std::sqrt(row_sqdist(fr, 0, fr, 1));
      double cur = sep - c.rest_length;
      double t_prev = f * c.frame_dt();
      double t_cur = (f + 1) * c.frame_dt();
      (void)t_prev;
      if (prev < 0.0 && cur >= 0.0) {
        double frac = -prev / (cur - prev);
        crossings.push_back(t_cur - c.frame_dt() * (1.0 - frac));
      }
      prev = cur;
    }
    REQUIRE(crossings.size() >= 3);
    return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  };

  double period = measure_period(cfg);
  double analytic = 2.0 * 3.14159265358979323846 * std::sqrt(1.0 / (2.0 * cfg.spring_k));
  CHECK(std::fabs(period - analytic) / analytic <= 0.01);

  // 100x finer reference integration agrees with the default-step run
  SimConfig fine = cfg;
  fine.dt_sim = cfg.dt_sim / 100.0;
  fine.stride = 100;
  double fine_period = measure_period(fine);
  CHECK(std::fabs(period - fine_period) / fine_period <= 0.01);
}

TEST_CASE("momentum is conserved with the hidden Coulomb channel active") {
  SimConfig cfg;
  cfg.n_particles = 8;
  cfg.coulomb_c = 0.2;
  cfg.frames = 10;
  SimResult r = simulate(cfg, 5);
  const auto& p0 = r.frame_momentum.front();
  for (const auto& p : r.frame_momentum) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::fabs(p[k] - p0[k]) <= 1e-9);
  }
}

TEST_CASE("symplectic integration keeps spring-system energy drift below half a percent") {
  SimConfig cfg;
  cfg.n_particles = 8;
  cfg.coulomb_c = 0.0;
  cfg.frames = 25;
  cfg.stride = 40;
  SimResult r = simulate(cfg, 7);
  double e0 = r.frame_energy.front();
  REQUIRE(std::fabs(e0) > 1e-12);
  for (double e : r.frame_energy) {
    CHECK(std::fabs(e - e0) / std::fabs(e0) <= 0.005);
  }
}

TEST_CASE("integration blow-up raises a numeric error suggesting a smaller step") {
  SimConfig cfg;
  cfg.n_particles = 6;
  cfg.spring_k = 0.5;
  cfg.dt_sim = 50.0;  // far beyond the stability limit
  cfg.frames = 20;
  cfg.stride = 10;
  CHECK_THROWS_AS(simulate(cfg, 9), numeric_error);
}

TEST_CASE("dataset splits are sized, disjoint and exhaustive") {
  SimConfig cfg;
  cfg.n_particles = 5;
  cfg.frames = 3;
  Dataset ds = build_dataset(cfg, 10, {0.6, 0.2, 0.2}, 11);
  CHECK(ds.train_idx.size() == 6);
  CHECK(ds.val_idx.size() == 2);
  CHECK(ds.test_idx.size() == 2);
  std::vector<bool> seen(10, false);
  for (const auto* idx : {&ds.train_idx, &ds.val_idx, &ds.test_idx}) {
    for (std::size_t i : *idx) {
      CHECK(!seen[i]);
      seen[i] = true;
    }
  }
  for (bool b : seen) CHECK(b);
  CHECK_THROWS_AS(build_dataset(cfg, 10, {0.5, 0.2, 0.2}, 11), contract_error);
}

TEST_CASE("same seed reproduces the dataset bit for bit") {
  SimConfig cfg;
  cfg.n_particles = 5;
  cfg.frames = 3;
  Dataset a = build_dataset(cfg, 6, {0.5, 0.25, 0.25}, 13);
  Dataset b = build_dataset(cfg, 6, {0.5, 0.25, 0.25}, 13);
  write_dataset(a, "ds_a.txt");
  write_dataset(b, "ds_b.txt");
  CHECK(read_file("ds_a.txt") == read_file("ds_b.txt"));
  std::remove("ds_a.txt");
  std::remove("ds_b.txt");
}

TEST_CASE("every sample shares the seeded spring topology") {
  SimConfig cfg;
  cfg.n_particles = 8;
  cfg.frames = 2;
  cfg.seed = 17;
  Dataset ds = build_dataset(cfg, 5, {0.6, 0.2, 0.2}, 99);
  const auto& ref = ds.samples.front().state.graph.edges;
  for (const Sample& s : ds.samples) {
    CHECK(s.state.graph.edges == ref);
  }
  CHECK(ref.size() == 2 * spring_pairs(cfg).size());
}

TEST_CASE("dataset file round-trip is lossless") {
  SimConfig cfg;
  cfg.n_particles = 6;
  cfg.frames = 4;
  Dataset ds = build_dataset(cfg, 4, {0.5, 0.25, 0.25}, 19);
  write_dataset(ds, "ds_rt.txt");
  Dataset back = read_dataset("ds_rt.txt");
  write_dataset(back, "ds_rt2.txt");
  CHECK(read_file("ds_rt.txt") == read_file("ds_rt2.txt"));

  REQUIRE(back.samples.size() == ds.samples.size());
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    CHECK(max_abs_diff(back.samples[s].state.positions, ds.samples[s].state.positions) == 0.0);
    CHECK(max_abs_diff(back.samples[s].state.velocities, ds.samples[s].state.velocities) == 0.0);
    for (std::size_t t = 0; t < ds.samples[s].truth.n_steps(); ++t) {
      CHECK(max_abs_diff(back.samples[s].truth.frames[t], ds.samples[s].truth.frames[t]) == 0.0);
    }
    CHECK(back.samples[s].truth.dt == ds.samples[s].truth.dt);
  }
  CHECK(back.train_idx == ds.train_idx);
  CHECK(back.provenance.at("k") == ds.provenance.at("k"));
  std::remove("ds_rt.txt");
  std::remove("ds_rt2.txt");
}

TEST_CASE("empty files and malformed lines fail with line numbers") {
  {
    std::ofstream os("ds_empty.txt");
  }
  CHECK_THROWS_WITH_AS(read_dataset("ds_empty.txt"), doctest::Contains("missing header"),
                       parse_error);
  std::remove("ds_empty.txt");

  {
    std::ofstream os("ds_bad.txt");
    os << "painet.dataset version=1 samples=1 particles=1 feat_dim=1 edge_attr_dim=1 frames=1 "
          "dt=1 start_time=0\n";
    os << "split train 0\n";
    os << "split val\n";
    os << "split test\n";
    os << "sample 0\n";
    os << "types nonsense\n";
  }
  try {
    read_dataset("ds_bad.txt");
    CHECK(false);
  } catch (const parse_error& e) {
    CHECK(e.line_number == 6);
  }
  std::remove("ds_bad.txt");
}

TEST_CASE("hand-written single-particle file parses to the expected state") {
  {
    std::ofstream os("ds_one.txt");
    os << "painet.dataset version=1 samples=1 particles=1 feat_dim=2 edge_attr_dim=1 frames=2 "
          "dt=0.5 start_time=0 k=0 r0=1 c=0\n";
    os << "split train 0\n";
    os << "split val\n";
    os << "split test\n";
    os << "sample 0\n";
    os << "types 0\n";
    os << "features 1.5 2.5\n";
    os << "edges 0\n";
    os << "x0 0.25 -1 2\n";
    os << "v0 1 0 0\n";
    os << "frame 0 0.75 -1 2\n";
    os << "frame 1 1.25 -1 2\n";
  }
  Dataset ds = read_dataset("ds_one.txt");
  REQUIRE(ds.samples.size() == 1);
  const Sample& s = ds.samples[0];
  CHECK(s.state.n_particles() == 1);
  CHECK(s.state.types[0] == 0);
  CHECK(s.state.features(0, 0) == 1.5);
  CHECK(s.state.features(0, 1) == 2.5);
  CHECK(s.state.graph.n_edges() == 0);
  CHECK(s.state.positions(0, 0) == 0.25);
  CHECK(s.truth.dt == 0.5);
  CHECK(s.truth.n_steps() == 2);
  CHECK(s.truth.frames[1](0, 0) == 1.25);
  std::remove("ds_one.txt");
}

TEST_CASE("linear baseline extrapolates inertially") {
  SimConfig cfg;
  cfg.n_particles = 4;
  cfg.spring_k = 0.0;
  cfg.coulomb_c = 0.0;
  cfg.frames = 3;
  SimResult r = simulate(cfg, 21);

  // force-free: the baseline is the exact dynamics
  Trajectory base = linear_baseline(r.state, cfg.frames, cfg.frame_dt());
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    CHECK(max_abs_diff(base.frames[t], r.trajectory.frames[t]) <= 1e-12);
  }

  // zero velocity: constant frames
  SystemState still = r.state;
  still.velocities = Array({4, 3});
  Trajectory constant = linear_baseline(still, 3, 0.4);
  for (const Array& f : constant.frames) CHECK(max_abs_diff(f, still.positions) == 0.0);

  // with springs the baseline is strictly wrong
  SimConfig springy = cfg;
  springy.spring_k = 0.5;
  springy.coulomb_c = 0.2;
  SimResult rs = simulate(springy, 23);
  Trajectory base2 = linear_baseline(rs.state, springy.frames, springy.frame_dt());
  CHECK(a_mse(base2, rs.trajectory) > 0.0);
}
