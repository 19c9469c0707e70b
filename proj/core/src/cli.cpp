#include "painet/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "painet/data.hpp"
#include "painet/metrics.hpp"
#include "painet/verify.hpp"

namespace painet::cli {

namespace fs = std::filesystem;

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw contract_error("option " + key + " expects a number, got '" + it->second + "'");
  }
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size() || v < 0) throw std::invalid_argument(it->second);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw contract_error("option " + key + " expects a non-negative integer, got '" +
                         it->second + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw contract_error("option " + key + " expects a boolean, got '" + v + "'");
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string body = line.substr(first, last - first + 1);
    auto eq = body.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw parse_error("expected key=value, got '" + body + "'", line_no);
    }
    out[body.substr(0, eq)] = body.substr(eq + 1);
  }
  return out;
}

RunConfig make_run_config(std::string command, const std::string& config_path,
                          const std::map<std::string, std::string>& overrides,
                          const std::string& out_dir, const std::string& seed_flag) {
  RunConfig rc;
  rc.command = std::move(command);
  rc.config_path = config_path;
  rc.out_dir = out_dir;
  if (!config_path.empty()) rc.values = parse_config_file(config_path);
  for (const auto& [k, v] : overrides) rc.values[k] = v;

  std::string seed_str = seed_flag;
  if (seed_str.empty()) seed_str = rc.get("seed", "");
  if (seed_str.empty()) {
    if (const char* env = std::getenv("PAINET_SEED")) seed_str = env;
  }
  if (!seed_str.empty()) {
    try {
      rc.seed = std::stoull(seed_str);
    } catch (const std::exception&) {
      throw contract_error("seed expects an unsigned integer, got '" + seed_str + "'");
    }
  }
  rc.values["seed"] = std::to_string(rc.seed);
  if (rc.out_dir.empty()) throw contract_error("an output directory (--out) is required");
  return rc;
}

void write_resolved_config(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  std::ofstream os(fs::path(rc.out_dir) / "config.resolved");
  if (!os) throw io_error("cannot write config snapshot under " + rc.out_dir);
  os << "command=" << rc.command << "\n";
  for (const auto& [k, v] : rc.values) os << k << "=" << v << "\n";
}

namespace {

std::array<double, 3> parse_split(const std::string& spec) {
  std::array<double, 3> r{};
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf", &r[0], &r[1], &r[2]) != 3) {
    throw contract_error("split expects three comma-separated ratios, got '" + spec + "'");
  }
  return r;
}

SimConfig sim_config_from(const RunConfig& rc) {
  SimConfig cfg;
  cfg.n_particles = rc.get_size("data.n_particles", 10);
  cfg.spring_k = rc.get_double("data.spring_k", 0.5);
  cfg.rest_length = rc.get_double("data.rest_length", 1.0);
  cfg.coulomb_c = rc.get_double("data.coulomb_c", 0.2);
  cfg.dt_sim = rc.get_double("data.dt_sim", 0.01);
  cfg.frames = rc.get_size("data.frames", 5);
  cfg.stride = rc.get_size("data.stride", 40);
  cfg.extra_springs = rc.get_size("data.extra_springs", 2);
  cfg.init_noise = rc.get_double("data.init_noise", 0.1);
  cfg.init_speed = rc.get_double("data.init_speed", 0.2);
  cfg.seed = rc.seed;
  return cfg;
}

std::size_t infer_n_types(const Dataset& ds) {
  std::size_t n_types = 1;
  for (const Sample& s : ds.samples) {
    for (std::size_t t : s.state.types) n_types = std::max(n_types, t + 1);
  }
  return n_types;
}

SampleSet truncated(SampleSet set, std::size_t horizon) {
  for (Sample& s : set) {
    if (s.truth.n_steps() > horizon) s.truth.frames.resize(horizon);
  }
  return set;
}

void write_loss_csv(const std::string& path, const TrainResult& result) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot write " + path);
  os << "epoch,train,val\n";
  char buf[96];
  for (std::size_t e = 0; e < result.train_curve.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e, result.train_curve[e],
                  result.val_curve[e]);
    os << buf;
  }
}

}  // namespace

int run_generate(const RunConfig& rc) {
  std::size_t samples = rc.get_size("data.samples", 0);
  if (samples == 0) throw contract_error("generate needs --samples >= 1");
  SimConfig cfg = sim_config_from(rc);
  auto split = parse_split(rc.get("data.split", "0.6,0.2,0.2"));
  write_resolved_config(rc);

  Dataset ds = build_dataset(cfg, samples, split, rc.seed);
  fs::path out = fs::path(rc.out_dir) / "dataset.txt";
  write_dataset(ds, out.string());
  std::cout << "generate: wrote " << ds.samples.size() << " samples (train " << ds.train_idx.size()
            << ", val " << ds.val_idx.size() << ", test " << ds.test_idx.size() << ") to " << out
            << "\n";
  return kExitOk;
}

int run_train(const RunConfig& rc) {
  std::string data_path = rc.get("data.path", "");
  if (data_path.empty()) throw contract_error("train needs --data <dataset file>");
  write_resolved_config(rc);
  if (!fs::exists(data_path)) throw io_error("dataset not found: " + data_path);
  Dataset ds = read_dataset(data_path);
  if (ds.train_idx.empty()) throw contract_error("dataset has an empty training split");

  std::size_t frames = ds.samples.front().truth.n_steps();
  std::size_t horizon = rc.get_size("model.horizon", frames);
  if (horizon == 0 || horizon > frames) {
    throw contract_error("model.horizon must lie in 1.." + std::to_string(frames));
  }

  ModelHyper hyper;
  hyper.embed_dim = rc.get_size("model.hidden", 32);
  hyper.encoder_hidden = hyper.embed_dim;
  hyper.decoder_hidden = hyper.embed_dim;
  hyper.decoder_layers = rc.get_size("model.layers", 3);
  hyper.horizon = horizon;
  hyper.num_heads = rc.get_size("model.num_heads", 1);
  hyper.eta = rc.get_double("model.eta", 0.5);
  hyper.tie_steps = rc.get_bool("model.tie_steps", false);
  hyper.strict_eq9 = rc.get_bool("model.strict_eq9", false);
  hyper.mean_aggregation = rc.get_bool("model.mean_aggregation", false);
  hyper.paper_literal_encoder = rc.get_bool("model.paper_literal_encoder", false);
  hyper.disable_attention = rc.get_bool("model.disable_attention", false);
  hyper.n_types = infer_n_types(ds);
  hyper.feat_dim = ds.samples.front().state.features.cols();
  hyper.edge_attr_dim = ds.samples.front().state.graph.attr_dim();
  hyper.learning_rate = rc.get_double("train.lr", 5e-4);
  hyper.weight_decay = rc.get_double("train.weight_decay", 1e-15);

  TrainConfig tc;
  tc.epochs = rc.get_size("train.epochs", 200);
  tc.patience = rc.get_size("train.patience", 50);
  tc.batch_size = std::max<std::size_t>(1, rc.get_size("train.batch", 8));
  tc.learning_rate = hyper.learning_rate;
  tc.weight_decay = hyper.weight_decay;
  tc.seed = rc.seed;
  bool quiet = rc.get_bool("train.quiet", false);
  if (!quiet) {
    tc.on_epoch = [](std::size_t epoch, double tr, double val) {
      std::printf("epoch %zu train %.6g val %.6g\n", epoch, tr, val);
    };
  }

  Rng rng(rc.seed);
  Model model(hyper, rng);
  TrainResult result =
      train(model, truncated(ds.train_set(), horizon), truncated(ds.val_set(), horizon), tc);

  fs::path model_path = fs::path(rc.out_dir) / "model.bin";
  model.save(model_path.string());
  write_loss_csv((fs::path(rc.out_dir) / "loss.csv").string(), result);
  std::cout << "train: best val A-MSE " << result.best_val << " at epoch " << result.best_epoch
            << "; model saved to " << model_path << "\n";
  return kExitOk;
}

int run_eval(const RunConfig& rc) {
  std::string model_path = rc.get("model.path", "");
  std::string data_path = rc.get("data.path", "");
  if (model_path.empty() || data_path.empty()) {
    throw contract_error("eval needs --model and --data");
  }
  std::string task = rc.get("eval.task", "s2t");
  if (task != "s2s" && task != "s2t") {
    throw contract_error("eval.task must be s2s or s2t, got '" + task + "'");
  }
  write_resolved_config(rc);
  Model model = Model::load(model_path);
  Dataset ds = read_dataset(data_path);

  SampleSet subset;
  std::string which = rc.get("eval.subset", "test");
  if (which == "test") subset = ds.test_set();
  else if (which == "val") subset = ds.val_set();
  else if (which == "train") subset = ds.train_set();
  else throw contract_error("eval.subset must be train, val or test");
  if (subset.empty()) subset = ds.samples;

  std::size_t frames = subset.front().truth.n_steps();
  std::size_t horizon = model.hyper().horizon;
  if (frames < horizon) {
    throw io_error("horizon mismatch: model predicts " + std::to_string(horizon) +
                   " steps but dataset provides " + std::to_string(frames));
  }
  subset = truncated(std::move(subset), horizon);

  EvalReport model_rep = evaluate_model(model, subset, horizon);
  std::vector<Trajectory> base_preds;
  base_preds.reserve(subset.size());
  for (const Sample& s : subset) {
    base_preds.push_back(linear_baseline(s.state, horizon, s.truth.dt));
  }
  EvalReport base_rep = evaluate_predictions(base_preds, subset);

  fs::path out = fs::path(rc.out_dir) / "eval.csv";
  std::ofstream os(out);
  if (!os) throw io_error("cannot write " + out.string());
  char buf[128];
  os << "step,model_mse,linear_mse\n";
  for (std::size_t t = 0; t < model_rep.per_step.size(); ++t) {
    if (task == "s2s" && t + 1 != model_rep.per_step.size()) continue;
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", t + 1, model_rep.per_step[t],
                  base_rep.per_step[t]);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "F-MSE,%.17g,%.17g\n", model_rep.final_mse, base_rep.final_mse);
  os << buf;
  if (task == "s2t") {
    std::snprintf(buf, sizeof(buf), "A-MSE,%.17g,%.17g\n", model_rep.avg_mse, base_rep.avg_mse);
    os << buf;
  }
  std::cout << "eval (" << task << ", " << which << "): model F-MSE " << model_rep.final_mse
            << ", linear F-MSE " << base_rep.final_mse;
  if (task == "s2t") {
    std::cout << "; model A-MSE " << model_rep.avg_mse << ", linear A-MSE " << base_rep.avg_mse;
  }
  std::cout << "; wrote " << out << "\n";
  return kExitOk;
}

int run_verify(const RunConfig& rc) {
  std::string suite = rc.get("verify.suite", "all");
  long trials = rc.has("verify.trials")
                    ? static_cast<long>(rc.get_size("verify.trials", 0))
                    : -1;
  double tolerance = rc.has("verify.tolerance") ? rc.get_double("verify.tolerance", 0.0) : -1.0;
  write_resolved_config(rc);

  auto results = verify::run_suites(suite, trials, tolerance, rc.seed);
  std::ofstream os(fs::path(rc.out_dir) / "verify_report.txt");
  bool all_pass = true;
  const verify::CheckResult* worst_fail = nullptr;
  for (const auto& r : results) {
    std::string line = r.summary_line();
    std::cout << line << "\n";
    if (os) os << line << "\n";
    if (!r.pass) {
      all_pass = false;
      if (!worst_fail || r.worst - r.tolerance > worst_fail->worst - worst_fail->tolerance) {
        worst_fail = &r;
      }
    }
  }
  if (!all_pass) {
    std::cerr << "verify failed; worst case: " << worst_fail->summary_line() << "\n";
    return kExitProperty;
  }
  return kExitOk;
}

int dispatch(const RunConfig& rc) {
  try {
    if (rc.command == "generate") return run_generate(rc);
    if (rc.command == "train") return run_train(rc);
    if (rc.command == "eval") return run_eval(rc);
    if (rc.command == "verify") return run_verify(rc);
    std::cerr << "unknown command '" << rc.command << "'\n";
    return kExitUsage;
  } catch (const contract_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace painet::cli
