#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "wtn/experiments.hpp"
#include "wtn/io.hpp"

using namespace wtn;
using wtn::test::TempDir;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("norms of a stored diag(3,4)") {
  TempDir dir("cli_norms");
  write_text(dir / "d.csv", "3,0\n0,4\n");
  const Result r = run({"norms", "--matrix", (dir / "d.csv").string(), "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["trace_norm"].get<double>() == doctest::Approx(7.0));
  CHECK(j["tc"].get<double>() == doctest::Approx(12.25));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
}

TEST_CASE("exit codes") {
  TempDir dir("cli_codes");
  CHECK(run({}).code == cli::usage);
  CHECK(run({"frobnicate"}).code == cli::usage);
  CHECK(run({"train", "--data", "x.csv", "--no-such-flag", "1"}).code == cli::usage);
  CHECK(run({"--help"}).code == cli::ok);
  CHECK(run({"train", "--help"}).code == cli::ok);
  CHECK(run({"train", "--data", (dir / "missing.csv").string(), "--out", dir.path.string()}).code == cli::data_error);

  write_text(dir / "bad.csv", "1,2,3\n1,2,x\n");
  const Result parse = run({"train", "--data", (dir / "bad.csv").string(), "--out", dir.path.string()});
  CHECK(parse.code == cli::data_error);
  CHECK(parse.err.find("line 2") != std::string::npos);

  write_text(dir / "t.csv", "1,1,5\n1,2,3\n2,1,4\n2,2,1\n");
  CHECK(run({"train", "--data", (dir / "t.csv").string(), "--alpha", "2", "--out", dir.path.string()}).code == cli::usage);
  CHECK(run({"train", "--data", (dir / "t.csv").string(), "--lambda", "abc"}).code == cli::usage);
  CHECK(run({"train", "--data", (dir / "t.csv").string(), "--config", (dir / "nope.cfg").string()}).code == cli::usage);

  const Result div = run({"train", "--data", (dir / "t.csv").string(), "--learning-rate", "1e6", "--init-scale", "100",
                          "--center", "false", "--out", dir.path.string()});
  CHECK(div.code == cli::divergence);
  CHECK(div.err.find("smaller learning rate") != std::string::npos);
}

TEST_CASE("config file with flag overrides, then eval through the checkpoint") {
  TempDir dir("cli_train");
  REQUIRE(run({"gen-lowrank", "--n", "40", "--m", "30", "--k", "2", "--samples", "3000", "--noise-sd", "0.2",
               "--distribution", "power-law", "--out", dir.path.string()}).code == 0);
  write_text(dir / "run.cfg", "k = 4\nlambda = 0.5\nalpha = 1\nepochs = 30\nlearning_rate = 0.02\n");
  const Result r = run({"train", "--config", (dir / "run.cfg").string(), "--lambda", "0.11", "--data",
                        (dir / "triplets.csv").string(), "--out", (dir.path / "t").string()});
  REQUIRE(r.code == 0);
  const json manifest = json::parse(slurp(dir.path / "t" / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["config"]["lambda"] == "0.11");
  CHECK(manifest["config"]["k"] == "4");
  CHECK(manifest["config"]["learning-rate"] == "0.02");
  CHECK(manifest["config"]["mode"] == "deterministic");
  CHECK(manifest.contains("version"));

  const FactorModel m = load_checkpoint(dir.path / "t" / "model");
  CHECK(m.lambda == 0.11);
  CHECK(m.k() == 4);

  const Result e = run({"eval", "--model", (dir.path / "t" / "model").string(), "--test", (dir / "triplets.csv").string(),
                        "--out", (dir.path / "e").string()});
  REQUIRE(e.code == 0);
  const json report = json::parse(e.out);
  const json trained = json::parse(slurp(dir.path / "t" / "train.json"));
  CHECK(report["rmse"].get<double>() == doctest::Approx(trained["train_rmse"].get<double>()).epsilon(1e-12));

  const Result ex = run({"eval", "--model", (dir.path / "t" / "model").string(), "--truth", (dir / "matrix.csv").string(),
                         "--distribution", "empirical", "--marginals-data", (dir / "triplets.csv").string(), "--out",
                         (dir.path / "e2").string()});
  REQUIRE(ex.code == 0);
  CHECK(json::parse(ex.out)["excess_error"].get<double>() >= 0.0);
}

TEST_CASE("synth-blocks goes through the library path, and manifests replay") {
  TempDir dir("cli_blocks");
  const std::vector<std::string> args{"synth-blocks", "--n-a", "15", "--n-b", "45", "--samples", "3000",
                                      "--lambdas", "0.03,0.3,3", "--k", "4", "--epochs", "15",
                                      "--out", (dir.path / "a").string()};
  REQUIRE(run(args).code == 0);

  SyntheticBlocksConfig cfg;
  cfg.n_a = 15;
  cfg.n_b = 45;
  cfg.sample_size = 3000;
  cfg.lambdas = {0.03, 0.3, 3};
  cfg.train.k = 4;
  cfg.train.epochs = 15;
  CHECK(slurp(dir.path / "a" / "curve.csv") == to_csv(run_synthetic_blocks(cfg)));

  REQUIRE(run({"synth-blocks", "--manifest", (dir.path / "a" / "manifest.json").string(), "--out",
               (dir.path / "b").string()}).code == 0);
  CHECK(slurp(dir.path / "b" / "curve.csv") == slurp(dir.path / "a" / "curve.csv"));
  CHECK(slurp(dir.path / "b" / "summary.json") == slurp(dir.path / "a" / "summary.json"));

  CHECK(run({"train", "--manifest", (dir.path / "a" / "manifest.json").string()}).code == cli::usage);
}

TEST_CASE("split writes three files that add up") {
  TempDir dir("cli_split");
  REQUIRE(run({"gen-lowrank", "--n", "30", "--m", "20", "--samples", "1000", "--dense", "false", "--out",
               dir.path.string()}).code == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "matrix.csv"));
  const Result r = run({"split", "--data", (dir / "triplets.csv").string(), "--valid", "100", "--test", "50",
                        "--seed", "3", "--out", (dir.path / "s").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "train 850 validation 100 test 50\n");
  for (const char* f : {"train.csv", "validation.csv", "test.csv", "users.csv", "items.csv"})
    CHECK(std::filesystem::exists(dir.path / "s" / f));
  CHECK(run({"split", "--data", (dir / "triplets.csv").string(), "--valid", "900", "--test", "100", "--out",
             (dir.path / "s2").string()}).code == cli::data_error);
}
