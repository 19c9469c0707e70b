// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Heavier than the unit tests (includes three training
// runs on the synthetic hidden-interaction dataset).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "painet/data.hpp"
#include "painet/metrics.hpp"
#include "painet/verify.hpp"

using namespace painet;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d (%s): %s (%s)\n", criterion, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// criterion-6 dataset: springs observed, all-pair Coulomb hidden
Dataset learning_dataset() {
  SimConfig cfg;
  cfg.n_particles = 10;
  cfg.spring_k = 0.5;
  cfg.rest_length = 1.0;
  cfg.coulomb_c = 0.2;
  cfg.dt_sim = 0.01;
  cfg.frames = 5;
  cfg.stride = 40;
  cfg.extra_springs = 2;
  cfg.seed = 42;
  return build_dataset(cfg, 250, {0.8, 0.1, 0.1}, 42);
}

ModelHyper learning_hyper(std::size_t layers, bool disable_attention) {
  ModelHyper h;
  h.embed_dim = 32;
  h.horizon = 5;
  h.decoder_layers = layers;
  h.num_heads = 1;
  h.n_types = 2;
  h.feat_dim = 2;
  h.edge_attr_dim = 1;
  h.encoder_hidden = 32;
  h.decoder_hidden = 32;
  h.eta = 0.5;
  h.disable_attention = disable_attention;
  return h;
}

double train_and_test_amse(const Dataset& ds, std::size_t layers, bool disable_attention) {
  Rng rng(1);
  Model model(learning_hyper(layers, disable_attention), rng);
  TrainConfig tc;
  tc.epochs = 15;
  tc.patience = 50;
  tc.batch_size = 8;
  tc.learning_rate = 5e-3;
  tc.weight_decay = 1e-15;
  tc.seed = 1;
  train(model, ds.train_set(), ds.val_set(), tc);
  return evaluate_model(model, ds.test_set(), 5).avg_mse;
}

}  // namespace

int main() {
  // 1. energy descent (Theorem 1 as an executable property)
  {
    auto t0 = Clock::now();
    auto r = verify::descent_suite(100, 1e-9, 1);
    double secs = seconds_since(t0);
    report(1, "energy descent", r.pass && secs <= 30.0,
           fmt("max_violation=%.3e tol=1e-9, %.1fs <= 30s", r.worst, secs));
  }

  // 2. SE(3) equivariance end to end, embeddings invariant
  {
    auto t0 = Clock::now();
    auto coords = verify::equivariance_suite(20, 1e-9, 2);
    auto embeds = verify::embedding_invariance_suite(20, 1e-12, 3);
    double secs = seconds_since(t0);
    report(2, "SE(3) equivariance", coords.pass && embeds.pass && secs <= 30.0,
           fmt("coords=%.3e tol=1e-9, embeddings=%.3e tol=1e-12, %.1fs <= 30s", coords.worst,
               embeds.worst, secs));
  }

  // 3. permutation equivariance
  {
    auto r = verify::permutation_suite(20, 1e-12, 4);
    report(3, "permutation equivariance", r.pass, fmt("max=%.3e tol=1e-12", r.worst));
  }

  // 4. matrix form == pairwise form
  {
    auto r = verify::matrix_pairwise_suite(20, 1e-10, 5);
    report(4, "matrix/pairwise equivalence", r.pass, fmt("max=%.3e tol=1e-10", r.worst));
  }

  // 5. gradient correctness on the tiny instance
  {
    auto r = verify::gradient_suite(1e-4, 6);
    report(5, "gradient correctness", r.pass,
           fmt("worst_rel=%.3e tol=1e-4 over %zu components", r.worst, r.trials));
  }

  // 6-8 share the synthetic dataset and its trained models
  {
    auto t0 = Clock::now();
    Dataset ds = learning_dataset();

    SampleSet test = ds.test_set();
    std::vector<Trajectory> baseline;
    baseline.reserve(test.size());
    for (const Sample& s : test) {
      baseline.push_back(linear_baseline(s.state, 5, s.truth.dt));
    }
    double linear_amse = evaluate_predictions(baseline, test).avg_mse;

    double full_amse = train_and_test_amse(ds, 3, false);
    double secs6 = seconds_since(t0);
    report(6, "learning beats linear baseline by 30%",
           full_amse <= 0.7 * linear_amse && secs6 <= 600.0,
           fmt("model=%.4f linear=%.4f ratio=%.3f <= 0.70, %.0fs <= 600s", full_amse,
               linear_amse, full_amse / linear_amse, secs6));

    double ablated_amse = train_and_test_amse(ds, 3, true);
    report(7, "attention ablation degrades accuracy", ablated_amse > full_amse,
           fmt("disabled=%.4f > full=%.4f", ablated_amse, full_amse));

    double shallow_amse = train_and_test_amse(ds, 1, false);
    report(8, "decoder depth direction (L=3 <= L=1)", full_amse <= shallow_amse,
           fmt("L3=%.4f <= L1=%.4f", full_amse, shallow_amse));
  }

  // 9. near-linear wall time in the prediction horizon
  {
    ModelHyper hyper = learning_hyper(3, false);
    std::vector<std::size_t> ns{64}, ts{5, 10};
    auto rows = scaling_probe(hyper, ns, ts, 7);
    double ratio = rows[1].time_ms / rows[0].time_ms;
    report(9, "T-scaling ratio", ratio <= 2.5,
           fmt("time(T=10)/time(T=5)=%.2f <= 2.5 at N=64 (N-scaling measured, not asserted)",
               ratio));
    std::ofstream os("acceptance_scaling.csv");
    write_scaling_csv(os, rows);
  }

  // 10. simulator fidelity: period, momentum, energy drift
  {
    SimConfig pair_cfg;
    pair_cfg.n_particles = 2;
    pair_cfg.spring_k = 0.5;
    pair_cfg.rest_length = 1.0;
    pair_cfg.coulomb_c = 0.0;
    pair_cfg.dt_sim = 0.01;
    pair_cfg.stride = 1;
    pair_cfg.frames = 4000;
    Array x0({2, 3});
    x0(0, 0) = -0.51;
    x0(1, 0) = 0.51;
    Array v0({2, 3});
    SimResult pair = integrate(pair_cfg, x0, v0);
    std::vector<double> crossings;
    double prev = 0.02;
    for (std::size_t f = 0; f < pair.trajectory.frames.size(); ++f) {
      const Array& fr = pair.trajectory.frames[f];
      double cur = std::sqrt(row_sqdist(fr, 0, fr, 1)) - pair_cfg.rest_length;
      if (prev < 0.0 && cur >= 0.0) {
        double frac = -prev / (cur - prev);
        crossings.push_back((f + frac) * pair_cfg.frame_dt());
      }
      prev = cur;
    }
    double period = (crossings.back() - crossings.front()) /
                    static_cast<double>(crossings.size() - 1);
    double analytic = 2.0 * 3.14159265358979323846 * std::sqrt(1.0 / (2.0 * pair_cfg.spring_k));
    double period_err = std::fabs(period - analytic) / analytic;

    SimConfig full_cfg;
    full_cfg.n_particles = 8;
    full_cfg.coulomb_c = 0.2;
    full_cfg.frames = 20;
    SimResult momentum_run = simulate(full_cfg, 11);
    double worst_momentum = 0.0;
    for (const auto& p : momentum_run.frame_momentum) {
      for (std::size_t k = 0; k < 3; ++k) {
        worst_momentum =
            std::max(worst_momentum, std::fabs(p[k] - momentum_run.frame_momentum[0][k]));
      }
    }

    SimConfig energy_cfg = full_cfg;
    energy_cfg.coulomb_c = 0.0;
    SimResult energy_run = simulate(energy_cfg, 12);
    double e0 = energy_run.frame_energy.front();
    double worst_drift = 0.0;
    for (double e : energy_run.frame_energy) {
      worst_drift = std::max(worst_drift, std::fabs(e - e0) / std::fabs(e0));
    }

    bool pass = period_err <= 0.01 && worst_momentum <= 1e-9 && worst_drift <= 0.005;
    report(10, "simulator fidelity", pass,
           fmt("period_err=%.4f%% <= 1%%, momentum=%.2e <= 1e-9, energy_drift=%.4f%% <= 0.5%%",
               100 * period_err, worst_momentum, 100 * worst_drift));
  }

  // 11. bit-exact serialization and seeded reproducibility
  {
    namespace fs = std::filesystem;
    auto slurp = [](const std::string& p) {
      std::ifstream is(p, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(is)),
                         std::istreambuf_iterator<char>());
    };

    SimConfig cfg;
    cfg.n_particles = 6;
    cfg.frames = 3;
    cfg.seed = 2;
    Dataset d1 = build_dataset(cfg, 5, {0.6, 0.2, 0.2}, 21);
    Dataset d2 = build_dataset(cfg, 5, {0.6, 0.2, 0.2}, 21);
    write_dataset(d1, "acc_ds1.txt");
    write_dataset(d2, "acc_ds2.txt");
    Dataset round = read_dataset("acc_ds1.txt");
    write_dataset(round, "acc_ds3.txt");
    bool dataset_ok =
        slurp("acc_ds1.txt") == slurp("acc_ds2.txt") && slurp("acc_ds1.txt") == slurp("acc_ds3.txt");

    ModelHyper hyper = learning_hyper(2, false);
    hyper.feat_dim = d1.samples.front().state.features.cols();
    auto train_once = [&](const std::string& path) {
      Rng rng(3);
      Model m(hyper, rng);
      TrainConfig tc;
      tc.epochs = 3;
      tc.batch_size = 2;
      tc.learning_rate = 1e-3;
      tc.seed = 3;
      train(m, d1.train_set(), d1.val_set(), tc);
      m.save(path);
      return m;
    };
    Model m1 = train_once("acc_m1.bin");
    train_once("acc_m2.bin");
    Model m2 = Model::load("acc_m1.bin");
    Trajectory p1 = m1.predict(d1.samples[0].state, hyper.horizon);
    Trajectory p2 = m2.predict(d1.samples[0].state, hyper.horizon);
    double predict_diff = 0.0;
    for (std::size_t t = 0; t < p1.n_steps(); ++t) {
      predict_diff = std::max(predict_diff, max_abs_diff(p1.frames[t], p2.frames[t]));
    }
    bool model_ok = slurp("acc_m1.bin") == slurp("acc_m2.bin") && predict_diff == 0.0;

    for (const char* f : {"acc_ds1.txt", "acc_ds2.txt", "acc_ds3.txt", "acc_m1.bin",
                          "acc_m2.bin"}) {
      fs::remove(f);
    }
    report(11, "bit-exact serialization and reproducibility", dataset_ok && model_ok,
           fmt("dataset_bytes=%s model_bytes+reload=%s", dataset_ok ? "equal" : "DIFFER",
               model_ok ? "equal" : "DIFFER"));
  }

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
