#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "temp_dir.hpp"

#ifndef URLR_CLI_PATH
#error "URLR_CLI_PATH must point at the urlr executable"
#endif

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run urlr(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("cd '") + dir.path().string() + "' && '" URLR_CLI_PATH "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

nlohmann::json load(const std::filesystem::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and version") {
    TempDir dir;
    const Run help = urlr(dir, "--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("fit") != std::string::npos);
    CHECK(help.out.find("sweep") != std::string::npos);
    CHECK(urlr(dir, "--version").code == 0);
  }

  TEST_CASE("usage errors exit with 1") {
    TempDir dir;
    CHECK(urlr(dir, "fit --bogus").code == 1);
    CHECK(urlr(dir, "frobnicate").code == 1);
    CHECK(urlr(dir, "fit --features nope.csv --out o").code == 1);
  }

  TEST_CASE("synth, fit, predict and eval chain") {
    TempDir dir;
    dir.write("spec.json",
              R"({"n_nodes": 25, "theta_source": "linear", "feature_dim": 3,
                  "graph": {"kind": "random_pairs", "n_pairs": 120, "connected": true},
                  "flip_prob": 0.15, "n_test_nodes": 10})");
    const Run synth = urlr(dir, "synth --config spec.json --seed 4 --out data");
    REQUIRE_MESSAGE(synth.code == 0, synth.err);
    CHECK(synth.out.find("25 nodes, 120 edges") != std::string::npos);
    CHECK(load(dir / "data/manifest.json")["seed"] == 4);

    const Run fit = urlr(dir, "fit --labels data/labels.csv --features data/features.csv --prune 15 "
                              "--truth-outliers data/truth.csv --out fit");
    REQUIRE_MESSAGE(fit.code == 0, fit.err);
    for (const char* f : {"model.txt", "pruned.csv", "path.csv", "result.json", "manifest.json"}) {
      CHECK_MESSAGE(std::filesystem::exists(dir / "fit" / f), f);
    }
    const auto result = load(dir / "fit/result.json");
    CHECK(result["method"] == "urlr");
    CHECK(result["metrics"]["n_pruned"] == 18);
    CHECK(result["metrics"].contains("auc"));
    const auto manifest = load(dir / "fit/manifest.json");
    CHECK(manifest["command"] == "fit");
    CHECK(manifest["inputs"].size() == 3);
    CHECK(manifest.contains("tool_version"));
    CHECK(manifest.contains("wall_clock_seconds"));
    CHECK(manifest["inputs"]["data/features.csv"].get<std::string>().size() == 64);

    const Run predict = urlr(dir, "predict --model fit/model.txt --features data/test_features.csv "
                                  "--out scores.csv");
    REQUIRE_MESSAGE(predict.code == 0, predict.err);
    const Run eval = urlr(dir, "eval --scores scores.csv --truth-order data/test_theta.csv "
                               "--path fit/path.csv --truth-outliers data/truth.csv --method urlr "
                               "--seed 4 --p 15 --out metrics.csv");
    REQUIRE_MESSAGE(eval.code == 0, eval.err);
    const std::string metrics = slurp(dir / "metrics.csv");
    CHECK(metrics.rfind("method,seed,p,error_rate,onr,kendall_distance,auc\nurlr,4,15,0,0,", 0) == 0);
    const auto report = load(dir / "metrics.json");
    CHECK(report["kendall_distance"].get<double>() < 0.3);
    CHECK(report["auc"].get<double>() > 0.5);
    CHECK(report["tpr_fpr"].size() >= 2);
  }

  TEST_CASE("a missing feature row is reported by node id") {
    TempDir dir;
    dir.write("labels.csv", "preferred,other\n0,1\n1,7\n");
    dir.write("features.csv", "id,f0\n0,1\n1,2\n2,3\n");
    const Run r = urlr(dir, "fit --labels labels.csv --features features.csv --out o");
    CHECK(r.code == 1);
    CHECK(r.err.find("node 7 (record 2)") != std::string::npos);
  }

  TEST_CASE("baselines warn that the pruning rate is ignored") {
    TempDir dir;
    REQUIRE(urlr(dir, "fixtures --variant b --out fx").code == 0);
    const Run r = urlr(dir, "fit --labels fx/fixture_b/labels.csv --features fx/fixture_b/features.csv "
                            "--method raw --prune 10 --out o");
    CHECK(r.code == 0);
    CHECK(r.err.find("warning: the pruning rate is ignored by method raw") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "o/path.csv"));
  }

  TEST_CASE("fixture a at p = 50 prunes A->E") {
    TempDir dir;
    REQUIRE(urlr(dir, "fixtures --variant a --out fx").code == 0);
    const Run r = urlr(dir, "fit --labels fx/fixture_a/labels.csv --features fx/fixture_a/features.csv "
                            "--method urlr --prune 50 --out o");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(dir / "o/pruned.csv").find(",0,4,2\n") != std::string::npos);
  }

  TEST_CASE("fixtures") {
    TempDir dir;
    CHECK(urlr(dir, "fixtures --out fx").code == 0);
    for (const char* v : {"a", "b", "c"}) {
      CHECK(std::filesystem::exists(dir / (std::string("fx/fixture_") + v + "/labels.csv")));
    }
    CHECK(urlr(dir, "fixtures --variant q --out fx").code == 1);
  }

  TEST_CASE("sweeps are reproducible across thread counts") {
    TempDir dir;
    dir.write("sweep.json",
              R"({"data": {"n_nodes": 12, "flip_prob": 0.2}, "axis": "prune",
                  "values": [0, 20], "n_seeds": 2})");
    REQUIRE(urlr(dir, "sweep sweep.json --out a.csv --metrics m.csv").code == 0);
    REQUIRE(urlr(dir, "sweep sweep.json --jobs 2 --out b.csv").code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv").rfind("method,seed,axis,axis_value,p,", 0) == 0);
    CHECK(std::filesystem::exists(dir / "a.manifest.json"));
    CHECK(urlr(dir, "sweep sweep.json --values 0,x").code == 1);
  }

  TEST_CASE("unknown configuration keys are rejected") {
    TempDir dir;
    REQUIRE(urlr(dir, "fixtures --variant a --out fx").code == 0);
    dir.write("cfg.json", R"({"prune_pct": 10})");
    const Run r = urlr(dir, "fit --labels fx/fixture_a/labels.csv --features fx/fixture_a/features.csv "
                            "--config cfg.json --out o");
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown key 'prune_pct'") != std::string::npos);
  }
}
