// Acceptance checks. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero if any criterion fails.
//
// The Cora check runs only when a dataset manifest is found, either through
// BIGCN_CORA_MANIFEST or at data/cora/manifest.json under the source tree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bigcn/bitlinalg.hpp"
#include "bigcn/capacity.hpp"
#include "bigcn/dataset.hpp"
#include "bigcn/efficiency.hpp"
#include "bigcn/layers.hpp"
#include "bigcn/model.hpp"
#include "cli.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bigcn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, double limit_s, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {Outcome::kFail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (v.outcome == Outcome::kPass && secs > limit_s) {
    v = {Outcome::kFail, v.detail + "; over the " + std::to_string(limit_s) + " s budget"};
  }
  const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
  if (v.outcome == Outcome::kFail) ++failures;
  std::printf("%s  %-28s %s [%.2f s]\n", tag, name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

Verdict verdict(bool ok, const std::string& detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, detail};
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool near(double x, double target, double tol) { return std::abs(x - target) <= tol; }

Verdict table1() {
  std::ostringstream out, err;
  const int code = cli::run({"analyze", "--preset", "cora", "--widths", "1433,64,7"}, out, err);
  if (code != 0) return {Outcome::kFail, "analyze exited " + std::to_string(code) + ": " + err.str()};
  const json j = json::parse(out.str());
  const auto fc = j["cycles"]["float"].get<std::uint64_t>();
  const auto bc = j["cycles"]["binary"].get<std::uint64_t>();
  const double cr = j["cycles"]["ratio"];
  const double mf = j["model_size"]["float_kib"], mb = j["model_size"]["binary_kib"];
  const double mr = j["model_size"]["ratio"];
  const double df = j["data_size"]["float_mib"], db = j["data_size"]["binary_mib"];
  const bool ok = fc == 249954739u && bc == 4669515u && near(cr, 53.5, 0.1) &&
                  near(mf, 360.0, 0.005) && near(mb, 11.53, 0.005) && near(mr, 31.2, 0.1) &&
                  near(df, 14.8, 0.05) && near(db, 0.47, 0.005);
  return verdict(ok, "cycles " + std::to_string(fc) + " / " + std::to_string(bc) +
                         fmt(" (%.3fx), model %.2f KB / %.2f KB", cr, mf, mb) +
                         fmt(" (%.2fx), data %.2f MB / %.3f MB", mr, df, db));
}

Verdict acceleration() {
  const double s1 = acceleration_ratios(1433, 0).feature_extraction;
  const double s2 = acceleration_ratios(64, 0).feature_extraction;
  return verdict(s1 >= 58.5 && s1 <= 59.0 && s2 >= 21.0 && s2 <= 21.5,
                 fmt("S_fe(1433) = %.3f, S_fe(64) = %.3f", s1, s2));
}

Verdict kernel_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng), k = dim(rng), m = dim(rng);
    const DenseMatrix h = testutil::random_matrix(n, k, rng, 1.0 + trial % 5);
    const DenseMatrix w = testutil::random_matrix(k, m, rng, 0.1 + trial % 3);
    const auto got = testutil::to_mat(bin_gemm(binarize_rows(h), binarize_columns(w)));
    const auto want = oracle::matmul(oracle::binarize_rows(testutil::to_mat(h)),
                                     oracle::binarize_columns(testutil::to_mat(w)));
    worst = std::max(worst, testutil::max_diff(got, want));
  }
  return verdict(worst <= 1e-6, fmt("1000 instances, max |diff| = %.3g (tol 1e-6)", worst));
}

Verdict binarization_optimality() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  double worst = -1e300;
  for (int trial = 0; trial < 500; ++trial) {
    std::normal_distribution<double> val(trial % 7 == 0 ? 3.0 : 0.0, 1.0 + trial % 4);
    std::vector<double> v(len(rng));
    for (double& x : v) x = val(rng);
    auto [bits, alpha] = binarize_vector(v);
    const auto s = unpack(bits);
    const double err = oracle::binarization_error(v, {s.begin(), s.end()}, alpha);
    worst = std::max(worst, err - oracle::exhaustive_min_error(v));
  }
  return verdict(worst <= 1e-12, fmt("500 vectors, max (J - J_min) = %.3g (tol 1e-12)", worst));
}

Verdict backward_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> nodes(1, 6), in(1, 8), out(1, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = nodes(rng), d_in = in(rng), d_out = out(rng);
    std::vector<Edge> edges;
    std::vector<std::pair<std::size_t, std::size_t>> plain;
    for (std::size_t e = 0; e < n; ++e) {
      const NodeId u = rng() % n, v = rng() % n;
      edges.emplace_back(u, v);
      plain.emplace_back(u, v);
    }
    const auto adj = normalize_adjacency(n, edges);
    const DenseMatrix h = testutil::random_matrix(n, d_in, rng);
    const DenseMatrix w = testutil::random_matrix(d_in, d_out, rng, 0.7);
    const DenseMatrix g = testutil::random_matrix(n, d_out, rng, 1.5);
    const SteMode mode = trial % 2 ? SteMode::kInputMagnitude : SteMode::kGradMagnitude;
    const auto got = bigcn_backward(bigcn_forward(adj, h, {w}, true).cache, adj, g, mode);
    const auto want = oracle::bigcn_backward(oracle::normalized_adjacency(n, plain),
                                             testutil::to_mat(h), testutil::to_mat(w),
                                             testutil::to_mat(g), mode == SteMode::kInputMagnitude);
    worst = std::max({worst, testutil::max_diff(testutil::to_mat(got.grad_h_in), want.grad_h),
                      testutil::max_diff(testutil::to_mat(got.grad_weight), want.grad_w)});
  }
  return verdict(worst <= 1e-9, fmt("200 instances, max |diff| = %.3g (tol 1e-9)", worst));
}

Verdict gcn_gradient_check() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  const double step = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 5, classes = 2 + trial % 3;
    std::vector<Edge> edges;
    std::vector<std::pair<std::size_t, std::size_t>> plain;
    for (std::size_t e = 0; e < n; ++e) {
      const NodeId u = rng() % n, v = rng() % n;
      edges.emplace_back(u, v);
      plain.emplace_back(u, v);
    }
    const DenseMatrix x = testutil::random_matrix(n, 3, rng);
    std::vector<int> labels(n);
    for (int& y : labels) y = static_cast<int>(rng() % classes);
    std::vector<bool> mask(n, true);
    const AttributedGraph graph(n, edges, x, labels, {}, static_cast<int>(classes));
    const auto ops = GraphOperators::build(graph);

    ModelConfig cfg;
    cfg.type = LayerType::kGcn;
    cfg.widths = {3, 4, classes};
    cfg.dropout = 0.0;
    cfg.seed = trial;
    Model model(cfg);
    std::vector<DenseMatrix> grads;
    std::mt19937_64 drop(0);
    model.forward_backward(ops, x, labels, mask, drop, grads);

    const auto a = oracle::normalized_adjacency(n, plain);
    std::vector<oracle::Mat> ws;
    for (const auto& p : model.parameters()) ws.push_back(testutil::to_mat(p));
    auto loss = [&](const std::vector<oracle::Mat>& w) {
      return oracle::softmax_xent(oracle::gcn_logits(a, testutil::to_mat(x), w), labels, mask);
    };
    for (std::size_t l = 0; l < ws.size(); ++l)
      for (std::size_t i = 0; i < ws[l].size(); ++i)
        for (std::size_t j = 0; j < ws[l][i].size(); ++j) {
          auto up = ws, dn = ws;
          up[l][i][j] += step;
          dn[l][i][j] -= step;
          const double fd = (loss(up) - loss(dn)) / (2 * step);
          const double g = grads[l](i, j);
          worst = std::max(worst, std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6}));
        }
  }
  return verdict(worst <= 1e-4, fmt("10 graphs with N <= 6, max relative error = %.3g (tol 1e-4)", worst));
}

Verdict entropy_analytics() {
  std::vector<double> uniform;
  for (int rep = 0; rep < 5; ++rep)
    for (int b = 0; b < 200; ++b) uniform.push_back(0.25 * b);
  const double hu = bin_neuron_entropy(uniform, 200);
  const double hc = bin_neuron_entropy(std::vector<double>(100, -0.3), 200);
  std::vector<double> two(50, 0.0);
  two.insert(two.end(), 50, 1.0);
  const double h2 = bin_neuron_entropy(two, 200);
  const auto bound = capacity_lower_bound(std::vector<double>{97.37}).d_bin_lower;
  const bool ok = near(hu, std::log2(200.0), 1e-9) && hc == 0.0 && near(h2, 1.0, 1e-9) && bound == 98;
  return verdict(ok, fmt("uniform %.9f bits (log2 200 = %.9f), constant %.1f, two-bin %.9f", hu,
                         std::log2(200.0), hc, h2) +
                         ", bound(97.37) = " + std::to_string(bound));
}

Verdict sbm_training() {
  SbmParams p;  // 700 nodes, 7 classes
  p.seed = 0;
  const AttributedGraph g = generate_sbm(p);
  const auto ops = GraphOperators::build(g);
  ModelConfig cfg;
  cfg.widths = {g.feature_dim(), 64, static_cast<std::size_t>(g.num_classes())};
  cfg.seed = 0;
  cfg.type = LayerType::kGcn;
  const double gcn = train(cfg, g, ops).test_acc;
  cfg.type = LayerType::kBiGcn;
  const double bi = train(cfg, g, ops).test_acc;
  return verdict(bi >= 0.9 * gcn, fmt("Bi-GCN %.4f vs GCN %.4f (ratio %.3f, need >= 0.9)", bi, gcn, bi / gcn));
}

std::optional<fs::path> cora_manifest() {
  if (const char* env = std::getenv("BIGCN_CORA_MANIFEST")) return fs::path(env);
  const fs::path local = fs::path(BIGCN_SOURCE_DIR) / "data" / "cora" / "manifest.json";
  if (fs::exists(local)) return local;
  return std::nullopt;
}

Verdict cora_training() {
  const auto manifest = cora_manifest();
  if (!manifest) return {Outcome::kSkip, "no Cora manifest (set BIGCN_CORA_MANIFEST)"};
  const AttributedGraph g = load_dataset(DatasetManifest::from_file(*manifest));
  const auto ops = GraphOperators::build(g);
  double bi = 0, fp = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelConfig cfg;
    cfg.widths = {g.feature_dim(), 64, static_cast<std::size_t>(g.num_classes())};
    cfg.seed = seed;
    cfg.type = LayerType::kBiGcn;
    bi += train(cfg, g, ops).test_acc / 10;
    cfg.type = LayerType::kGcn;
    fp += train(cfg, g, ops).test_acc / 10;
  }
  return verdict(bi >= 0.78 && fp >= 0.80, fmt("mean over 10 seeds: Bi-GCN %.4f (need 0.78), GCN %.4f (need 0.80)", bi, fp));
}

}  // namespace

int main() {
  report("table1-golden", 1.0, table1);
  report("acceleration-formulas", 1.0, acceleration);
  report("kernel-oracle", 10.0, kernel_oracle);
  report("binarization-optimality", 5.0, binarization_optimality);
  report("backward-oracle", 10.0, backward_oracle);
  report("gcn-gradient-check", 10.0, gcn_gradient_check);
  report("entropy-analytics", 1.0, entropy_analytics);
  report("sbm-training", 120.0, sbm_training);
  report("cora-training", 900.0, cora_training);
  std::printf("NOTE  %-28s %s\n", "not-reproducible",
              "PubMed/CiteSeer accuracies, large-graph results, the 97.37-bit PubMed entropy "
              "measurement and wall-clock speedups are outside desk-scale acceptance");
  std::printf("%s\n", failures == 0 ? "all acceptance criteria passed" : "acceptance FAILED");
  return failures == 0 ? 0 : 1;
}
