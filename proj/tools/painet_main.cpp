// Command-line front end: generate / train / eval / verify.

#include <CLI11.hpp>

#include <map>
#include <string>

#include "painet/cli.hpp"
#include "painet/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonFlags& common) {
  cmd->add_option("--config", common.config_path, "flat key=value config file");
  cmd->add_option("--out", common.out_dir, "output directory")->required();
  cmd->add_option("--seed", common.seed, "global seed (fallback: PAINET_SEED env, then 0)");
}

/// Registers a flag that lands in the override map under a dotted key.
void map_flag(CLI::App* cmd, std::map<std::string, std::string>& ov, const std::string& flag,
              const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov[key] = v; }, help);
}

void map_bool_flag(CLI::App* cmd, std::map<std::string, std::string>& ov,
                   const std::string& flag, const std::string& key, const std::string& help) {
  cmd->add_flag_callback(
      flag, [&ov, key]() { ov[key] = "true"; }, help);
}

void add_set_option(CLI::App* cmd, std::map<std::string, std::string>& ov) {
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&ov](const std::vector<std::string>& pairs) {
        for (const std::string& p : pairs) {
          auto eq = p.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError("--set expects key=value, got '" + p + "'");
          }
          ov[p.substr(0, eq)] = p.substr(eq + 1);
        }
      },
      "override any config key (dotted key=value, repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"painet: all-pair interaction networks for 3D multi-body dynamics"};
  app.require_subcommand(1);

  CommonFlags common;
  std::map<std::string, std::string> ov;

  CLI::App* generate = app.add_subcommand("generate", "simulate a synthetic dataset");
  add_common(generate, common);
  add_set_option(generate, ov);
  map_flag(generate, ov, "--n-particles", "data.n_particles", "particles per system");
  map_flag(generate, ov, "--samples", "data.samples", "number of independent samples");
  map_flag(generate, ov, "--frames", "data.frames", "trajectory frames per sample");
  map_flag(generate, ov, "--spring-k", "data.spring_k", "spring constant");
  map_flag(generate, ov, "--coulomb-c", "data.coulomb_c", "hidden all-pair repulsion strength");
  map_flag(generate, ov, "--dt", "data.dt_sim", "integrator step");
  map_flag(generate, ov, "--stride", "data.stride", "integrator steps per frame");
  map_flag(generate, ov, "--split", "data.split", "train,val,test ratios (default 0.6,0.2,0.2)");
  map_flag(generate, ov, "--rest-length", "data.rest_length", "spring rest length");
  map_flag(generate, ov, "--extra-springs", "data.extra_springs", "chords beyond the ring");

  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  add_common(train, common);
  add_set_option(train, ov);
  map_flag(train, ov, "--data", "data.path", "dataset file");
  map_flag(train, ov, "--hidden", "model.hidden", "embedding/hidden width");
  map_flag(train, ov, "--layers", "model.layers", "decoder EGNN layers");
  map_flag(train, ov, "--horizon", "model.horizon", "prediction steps (default: dataset frames)");
  map_flag(train, ov, "--eta", "model.eta", "attention mixing rate in (0,1)");
  map_flag(train, ov, "--num-heads", "model.num_heads", "attention heads");
  map_flag(train, ov, "--lr", "train.lr", "learning rate");
  map_flag(train, ov, "--weight-decay", "train.weight_decay", "weight decay");
  map_flag(train, ov, "--patience", "train.patience", "early-stopping patience (epochs)");
  map_flag(train, ov, "--epochs", "train.epochs", "epoch cap");
  map_flag(train, ov, "--batch", "train.batch", "minibatch size");
  map_bool_flag(train, ov, "--tie-steps", "model.tie_steps", "share weights across time steps");
  map_bool_flag(train, ov, "--disable-attention", "model.disable_attention",
                "pass-through encoder (ablation)");
  map_bool_flag(train, ov, "--quiet", "train.quiet", "suppress per-epoch output");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a model against the linear baseline");
  add_common(eval, common);
  add_set_option(eval, ov);
  map_flag(eval, ov, "--model", "model.path", "model file");
  map_flag(eval, ov, "--data", "data.path", "dataset file");
  map_flag(eval, ov, "--task", "eval.task", "s2s or s2t");
  map_flag(eval, ov, "--subset", "eval.subset", "train, val or test (default test)");

  CLI::App* verify = app.add_subcommand("verify", "run property suites");
  add_common(verify, common);
  add_set_option(verify, ov);
  map_flag(verify, ov, "--suite", "verify.suite",
           "descent | equivariance | gradients | matrix-vs-pairwise | all");
  map_flag(verify, ov, "--trials", "verify.trials", "trials per suite");
  map_flag(verify, ov, "--tolerance", "verify.tolerance", "override suite tolerances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return painet::cli::kExitUsage;
  }

  try {
    painet::cli::RunConfig rc = painet::cli::make_run_config(
        app.get_subcommands().front()->get_name(), common.config_path, ov, common.out_dir,
        common.seed);
    return painet::cli::dispatch(rc);
  } catch (const painet::io_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return painet::cli::kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return painet::cli::kExitUsage;
  }
}
