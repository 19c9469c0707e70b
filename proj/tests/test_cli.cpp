#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "painet/data.hpp"

using namespace painet;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PAINET_CLI_PATH;

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("generate writes a parseable dataset and a config snapshot") {
  TempDir tmp("painet_cli_gen");
  int code = run("generate --samples 6 --n-particles 5 --frames 3 --seed 3 --out " + tmp.str());
  CHECK(code == 0);
  CHECK(fs::exists(tmp.path / "config.resolved"));
  Dataset ds = read_dataset((tmp.path / "dataset.txt").string());
  CHECK(ds.samples.size() == 6);
  CHECK(ds.samples.front().state.n_particles() == 5);

  std::string snapshot = slurp(tmp.path / "config.resolved");
  CHECK(snapshot.find("command=generate") != std::string::npos);
  CHECK(snapshot.find("seed=3") != std::string::npos);
  CHECK(snapshot.find("data.samples=6") != std::string::npos);
}

TEST_CASE("generate rejects zero samples with a usage exit") {
  TempDir tmp("painet_cli_zero");
  CHECK(run("generate --samples 0 --out " + tmp.str()) == 2);
  CHECK(run("generate --samples notanumber --out " + tmp.str()) == 2);
  CHECK(run("bogus-subcommand --out " + tmp.str()) == 2);
}

TEST_CASE("generation is byte-reproducible for a fixed seed") {
  TempDir a("painet_cli_rep_a"), b("painet_cli_rep_b");
  std::string flags = "generate --samples 4 --n-particles 5 --frames 2 --seed 77 --out ";
  CHECK(run(flags + a.str()) == 0);
  CHECK(run(flags + b.str()) == 0);
  CHECK(slurp(a.path / "dataset.txt") == slurp(b.path / "dataset.txt"));
}

TEST_CASE("PAINET_SEED env is the seed fallback") {
  TempDir tmp("painet_cli_env");
  std::string cmd = "PAINET_SEED=1234 " + kCli + " generate --samples 2 --n-particles 4 --out " +
                    tmp.str() + " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) != -1);
  CHECK(slurp(tmp.path / "config.resolved").find("seed=1234") != std::string::npos);
}

TEST_CASE("config file values apply and flags override them") {
  TempDir tmp("painet_cli_cfg");
  {
    std::ofstream os(tmp.path / "run.cfg");
    os << "# generation settings\n";
    os << "data.samples=3\n";
    os << "data.n_particles=4\n";
  }
  int code = run("generate --config " + (tmp.path / "run.cfg").string() + " --samples 5 --out " +
                 tmp.str());
  CHECK(code == 0);
  Dataset ds = read_dataset((tmp.path / "dataset.txt").string());
  CHECK(ds.samples.size() == 5);                          // flag wins
  CHECK(ds.samples.front().state.n_particles() == 4);     // file value survives
  std::string snapshot = slurp(tmp.path / "config.resolved");
  CHECK(snapshot.find("data.samples=5") != std::string::npos);
}

TEST_CASE("train and eval round-trip through files") {
  TempDir tmp("painet_cli_train");
  REQUIRE(run("generate --samples 14 --n-particles 5 --frames 3 --seed 5 --out " + tmp.str()) ==
          0);
  std::string data = (tmp.path / "dataset.txt").string();

  SUBCASE("missing dataset exits with the i/o code") {
    CHECK(run("train --data /nonexistent/ds.txt --out " + tmp.str() + "/t0") == 1);
  }

  SUBCASE("training writes model and loss curve; zero lr flattens it") {
    int code = run("train --data " + data +
                   " --hidden 8 --layers 1 --epochs 3 --lr 0 --batch 4 --quiet --seed 2 --out " +
                   tmp.str() + "/t1");
    CHECK(code == 0);
    CHECK(fs::exists(tmp.path / "t1" / "model.bin"));
    std::string csv = slurp(tmp.path / "t1" / "loss.csv");
    CHECK(csv.rfind("epoch,train,val\n", 0) == 0);
    // all epochs identical under lr=0
    std::istringstream is(csv);
    std::string line, first_train;
    std::getline(is, line);
    while (std::getline(is, line)) {
      auto c1 = line.find(','), c2 = line.rfind(',');
      std::string train_val = line.substr(c1 + 1, c2 - c1 - 1);
      if (first_train.empty()) first_train = train_val;
      CHECK(train_val == first_train);
    }
  }

  SUBCASE("identical seeds give identical loss curves and model bytes") {
    std::string flags = "train --data " + data +
                        " --hidden 8 --layers 1 --epochs 3 --lr 2e-3 --batch 4 --quiet --seed 9 "
                        "--out ";
    REQUIRE(run(flags + tmp.str() + "/a") == 0);
    REQUIRE(run(flags + tmp.str() + "/b") == 0);
    CHECK(slurp(tmp.path / "a" / "loss.csv") == slurp(tmp.path / "b" / "loss.csv"));
    CHECK(slurp(tmp.path / "a" / "model.bin") == slurp(tmp.path / "b" / "model.bin"));
  }

  SUBCASE("eval writes per-step rows with baseline columns") {
    REQUIRE(run("train --data " + data +
                " --hidden 8 --layers 1 --epochs 2 --lr 1e-3 --batch 4 --quiet --seed 2 --out " +
                tmp.str() + "/m") == 0);
    std::string model = (tmp.path / "m" / "model.bin").string();

    CHECK(run("eval --model " + model + " --data " + data + " --task s2t --out " + tmp.str() +
              "/e1") == 0);
    std::string csv = slurp(tmp.path / "e1" / "eval.csv");
    CHECK(csv.rfind("step,model_mse,linear_mse\n", 0) == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n3,") != std::string::npos);
    CHECK(csv.find("F-MSE,") != std::string::npos);
    CHECK(csv.find("A-MSE,") != std::string::npos);

    CHECK(run("eval --model " + model + " --data " + data + " --task s2s --out " + tmp.str() +
              "/e2") == 0);
    std::string s2s = slurp(tmp.path / "e2" / "eval.csv");
    CHECK(s2s.find("\n1,") == std::string::npos);  // only the final step row
    CHECK(s2s.find("\n3,") != std::string::npos);
    CHECK(s2s.find("F-MSE,") != std::string::npos);
    CHECK(s2s.find("A-MSE,") == std::string::npos);

    CHECK(run("eval --model " + model + " --data " + data + " --task nonsense --out " +
              tmp.str() + "/e3") == 2);
  }

  SUBCASE("horizon mismatch exits with the i/o code") {
    REQUIRE(run("generate --samples 4 --n-particles 5 --frames 2 --seed 5 --out " + tmp.str() +
                "/short") == 0);
    REQUIRE(run("train --data " + data +
                " --hidden 8 --layers 1 --epochs 2 --lr 1e-3 --quiet --seed 2 --out " +
                tmp.str() + "/m3") == 0);
    CHECK(run("eval --model " + tmp.str() + "/m3/model.bin --data " + tmp.str() +
              "/short/dataset.txt --out " + tmp.str() + "/e4") == 1);
  }
}

TEST_CASE("verify subcommand reports pass/fail with matching exit codes") {
  TempDir tmp("painet_cli_verify");
  CHECK(run("verify --suite descent --trials 10 --seed 1 --out " + tmp.str() + "/v1") == 0);
  CHECK(
      run("verify --suite matrix-vs-pairwise --trials 5 --seed 1 --out " + tmp.str() + "/v2") ==
      0);
  CHECK(fs::exists(tmp.path / "v1" / "verify_report.txt"));
  std::string report = slurp(tmp.path / "v1" / "verify_report.txt");
  CHECK(report.find("descent:") != std::string::npos);
  CHECK(report.find("PASS") != std::string::npos);

  // forced failure path: zero tolerance on a suite with nonzero fp residue
  CHECK(run("verify --suite matrix-vs-pairwise --trials 5 --tolerance 0 --seed 1 --out " +
            tmp.str() + "/v3") == 4);
  CHECK(run("verify --suite nonsense --out " + tmp.str() + "/v4") == 2);
}
