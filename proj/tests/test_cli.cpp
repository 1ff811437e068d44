#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bigcn/capacity.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = bigcn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path small_sbm(const fs::path& dir) {
  const auto p = dir / "sbm.json";
  std::ofstream(p) << R"({"nodes_per_class": 20, "num_classes": 3, "feature_dim": 12,
                         "p_in": 0.2, "p_out": 0.01, "signal": 1.5,
                         "train_per_class": 5, "val_per_class": 5, "seed": 1})";
  return p;
}

}  // namespace

TEST_CASE("analyze reproduces the Cora table") {
  const auto r = run({"analyze", "--preset", "cora", "--widths", "1433,64,7"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["cycles"]["float"] == 249954739);
  CHECK(j["cycles"]["binary"] == 4669515);
  CHECK(r.out.find("249954739") != std::string::npos);

  const auto same = run({"analyze", "--nodes", "2708", "--edges", "5429", "--features", "1433",
                         "--widths", "1433,64,7"});
  CHECK(same.out == r.out);
}

TEST_CASE("train is byte-reproducible and eval reads its model") {
  TempDir tmp("bigcn_cli_train");
  const auto sbm = small_sbm(tmp.path);
  const std::vector<std::string> base{"train", "--sbm", sbm.string(), "--widths", "12,8,3",
                                      "--epochs", "30", "--seed", "4"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", (tmp.path / "a").string(), "--dump-activations",
                     (tmp.path / "act.bin").string()});
  b.insert(b.end(), {"--out", (tmp.path / "b").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  const auto ma = slurp(tmp.path / "a" / "metrics.jsonl");
  CHECK_FALSE(ma.empty());
  CHECK(ma == slurp(tmp.path / "b" / "metrics.jsonl"));
  const auto first = json::parse(ma.substr(0, ma.find('\n')));
  for (const char* key : {"epoch", "train_loss", "val_loss", "val_acc"}) CHECK(first.contains(key));
  const auto res = json::parse(slurp(tmp.path / "a" / "result.json"));
  CHECK(res["seed"] == 4);

  const auto ev = run({"eval", "--sbm", sbm.string(), "--load", (tmp.path / "a" / "model.bin").string()});
  REQUIRE(ev.code == 0);
  CHECK(json::parse(ev.out)["accuracy"] == res["test_acc"]);

  const auto cap = run({"capacity", (tmp.path / "act.bin").string(), "--bins", "20"});
  REQUIRE(cap.code == 0);
  CHECK(json::parse(cap.out)["d_fp"] == 8);
}

TEST_CASE("config file supplies defaults, flags override") {
  TempDir tmp("bigcn_cli_config");
  const auto sbm = small_sbm(tmp.path);
  const auto cfg = tmp.path / "cfg.json";
  std::ofstream(cfg) << R"({"model": "gcn", "widths": [12, 6, 3], "epochs": 5, "seed": 9})";
  REQUIRE(run({"train", "--config", cfg.string(), "--sbm", sbm.string(), "--seed", "2", "--out",
               (tmp.path / "o").string()})
              .code == 0);
  const auto res = json::parse(slurp(tmp.path / "o" / "result.json"));
  CHECK(res["model"] == "gcn");
  CHECK(res["seed"] == 2);
  CHECK(res["epochs_run"] == 5);
}

TEST_CASE("capacity on uniform neurons") {
  TempDir tmp("bigcn_cli_capacity");
  bigcn::DenseMatrix act(400, 3);
  for (std::size_t i = 0; i < 400; ++i)
    for (std::size_t k = 0; k < 3; ++k) act(i, k) = double((i + 37 * k) % 200) + 0.5;
  bigcn::write_activation_dump(tmp.path / "u.bin", act);
  const auto r = run({"capacity", (tmp.path / "u.bin").string(), "--bins", "200"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["d_bin_lower"] == static_cast<std::size_t>(std::ceil(3 * std::log2(200.0))));
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"train"}).code == 1);
  CHECK(run({"train", "--sbm", "a.json", "--dataset", "b.json"}).code == 1);
  CHECK(run({"analyze", "--preset", "cora", "--widths", "1433,x"}).code == 1);
  CHECK(run({"train", "--dataset", "/nonexistent/manifest.json"}).code == 2);
  const auto missing = run({"capacity", "/nonexistent/dump.bin"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find('\n') == missing.err.size() - 1);
  CHECK(run({"--help"}).code == 0);
}
