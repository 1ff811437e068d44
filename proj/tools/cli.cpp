#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "bigcn/bitlinalg.hpp"
#include "bigcn/capacity.hpp"
#include "bigcn/dataset.hpp"
#include "bigcn/efficiency.hpp"
#include "bigcn/model.hpp"

namespace bigcn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Options shared by train and eval. Unset fields fall back to the JSON
/// config file, then to the built-in defaults.
struct RunConfig {
  std::optional<std::string> config_path;
  std::optional<std::string> dataset;
  std::optional<std::string> sbm;
  std::optional<std::string> model;
  std::optional<std::string> widths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ste;
  std::optional<std::string> batch_norm;
  std::optional<double> dropout;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<int> patience;
  std::optional<std::size_t> hidden;
  bool no_clip = false;
  std::optional<std::string> out;
  std::optional<std::string> dump_activations;
  std::optional<std::string> load;
  std::string split = "test";
};

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long w = std::stoll(item, &pos);
      if (pos != item.size() || w < 1) throw std::invalid_argument(item);
      widths.push_back(static_cast<std::size_t>(w));
    } catch (const std::exception&) {
      throw UsageError("--widths: '" + item + "' is not a positive integer");
    }
  }
  if (widths.size() < 2) throw UsageError("--widths needs at least two comma-separated values");
  return widths;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Fills unset fields of `rc` from the --config file.
void merge_config_file(RunConfig& rc) {
  if (!rc.config_path) return;
  const json j = read_json_file(*rc.config_path);
  auto take = [&](auto& field, const char* key) {
    using T = typename std::remove_reference_t<decltype(field)>::value_type;
    if (!field && j.contains(key)) {
      try {
        field = j.at(key).get<T>();
      } catch (const json::exception& e) {
        throw UsageError(*rc.config_path + ": key '" + key + "': " + e.what());
      }
    }
  };
  take(rc.dataset, "dataset");
  take(rc.sbm, "sbm");
  take(rc.model, "model");
  take(rc.seed, "seed");
  take(rc.ste, "ste");
  take(rc.batch_norm, "batch_norm");
  take(rc.dropout, "dropout");
  take(rc.lr, "lr");
  take(rc.epochs, "epochs");
  take(rc.patience, "patience");
  take(rc.hidden, "hidden");
  take(rc.out, "out");
  if (!rc.widths && j.contains("widths")) {
    const auto& w = j.at("widths");
    if (w.is_string()) {
      rc.widths = w.get<std::string>();
    } else {
      std::string joined;
      for (const auto& v : w) joined += (joined.empty() ? "" : ",") + std::to_string(v.get<long long>());
      rc.widths = joined;
    }
  }
  if (!rc.no_clip && j.contains("clip_latent")) rc.no_clip = !j.at("clip_latent").get<bool>();
}

AttributedGraph load_graph(const RunConfig& rc) {
  if (rc.dataset.has_value() == rc.sbm.has_value()) {
    throw UsageError("exactly one of --dataset or --sbm is required");
  }
  try {
    if (rc.dataset) return load_dataset(DatasetManifest::from_file(*rc.dataset));
    return generate_sbm(SbmParams::from_file(*rc.sbm));
  } catch (const LoadError& e) {
    throw DataError(e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

ModelConfig model_config(const RunConfig& rc, const AttributedGraph& g) {
  ModelConfig cfg;
  try {
    if (rc.model) cfg.type = parse_layer_type(*rc.model);
    if (rc.ste) cfg.ste = parse_ste_mode(*rc.ste);
    if (rc.batch_norm) cfg.batch_norm = parse_batch_norm(*rc.batch_norm);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (rc.widths) {
    cfg.widths = parse_widths(*rc.widths);
  } else {
    cfg.widths = {g.feature_dim(), rc.hidden.value_or(64), static_cast<std::size_t>(g.num_classes())};
  }
  if (rc.dropout) cfg.dropout = *rc.dropout;
  if (rc.lr) cfg.lr = *rc.lr;
  if (rc.epochs) cfg.max_epochs = *rc.epochs;
  if (rc.patience) cfg.patience = *rc.patience;
  if (rc.seed) cfg.seed = *rc.seed;
  cfg.clip_latent = !rc.no_clip;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.widths.front() != g.feature_dim() ||
      cfg.widths.back() != static_cast<std::size_t>(g.num_classes())) {
    throw UsageError("--widths must start with the feature dimension (" +
                     std::to_string(g.feature_dim()) + ") and end with the class count (" +
                     std::to_string(g.num_classes()) + ")");
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

fs::path hidden_dump_path(const fs::path& base, std::size_t layer) {
  if (layer == 0) return base;
  fs::path p = base;
  p.replace_filename(base.stem().string() + ".layer" + std::to_string(layer + 1) +
                     base.extension().string());
  return p;
}

int cmd_train(RunConfig rc, std::ostream& out) {
  merge_config_file(rc);
  const AttributedGraph graph = load_graph(rc);
  const ModelConfig cfg = model_config(rc, graph);
  const fs::path out_dir = rc.out.value_or("out");
  fs::create_directories(out_dir);

  const GraphOperators ops = GraphOperators::build(graph);
  const TrainResult result = train(cfg, graph, ops);

  std::string metrics;
  for (const auto& m : result.trace) {
    metrics += json{{"epoch", m.epoch},
                    {"train_loss", m.train_loss},
                    {"val_loss", m.val_loss},
                    {"val_acc", m.val_acc}}
                   .dump();
    metrics += '\n';
  }
  write_text(out_dir / "metrics.jsonl", metrics);

  const json summary = {{"test_acc", result.test_acc},
                        {"best_epoch", result.best_epoch},
                        {"seed", cfg.seed},
                        {"model", std::string(to_string(cfg.type))},
                        {"widths", cfg.widths},
                        {"epochs_run", result.trace.size()},
                        {"best_val_loss", result.best_val_loss}};
  write_text(out_dir / "result.json", summary.dump(2) + "\n");
  result.model.save(out_dir / "model.bin");

  if (rc.dump_activations) {
    const auto hidden = result.model.hidden_activations(ops, graph.features());
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      write_activation_dump(hidden_dump_path(*rc.dump_activations, l), hidden[l]);
    }
  }
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_eval(RunConfig rc, std::ostream& out) {
  merge_config_file(rc);
  if (!rc.load) throw UsageError("eval requires --load <model.bin>");
  const AttributedGraph graph = load_graph(rc);
  std::optional<Model> model;
  try {
    model.emplace(Model::load(*rc.load));
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  const auto& widths = model->config().widths;
  if (widths.front() != graph.feature_dim() ||
      widths.back() != static_cast<std::size_t>(graph.num_classes())) {
    throw DataError("model architecture does not match the dataset");
  }
  Split split = Split::kTest;
  if (rc.split == "train") split = Split::kTrain;
  else if (rc.split == "val") split = Split::kVal;
  else if (rc.split != "test") throw UsageError("--split must be train, val or test");
  if (graph.count(split) == 0) throw DataError("the " + rc.split + " mask is empty");

  const GraphOperators ops = GraphOperators::build(graph);
  const double acc =
      masked_accuracy(model->logits(ops, graph.features()), graph.labels(), graph.mask(split));
  out << json{{"split", rc.split}, {"count", graph.count(split)}, {"accuracy", acc}}.dump()
      << '\n';
  return kOk;
}

int cmd_capacity(const std::vector<std::string>& dumps, std::size_t bins,
                 const std::optional<std::string>& out_dir, std::ostream& out) {
  if (dumps.empty()) throw UsageError("capacity requires at least one activation dump");
  if (bins == 0) throw UsageError("--bins must be >= 1");
  std::vector<EntropyEstimate> estimates;
  json layers = json::array();
  for (const auto& path : dumps) {
    DenseMatrix activations;
    try {
      activations = read_activation_dump(path);
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    if (activations.cols() == 0 || activations.rows() == 0) {
      throw DataError(path + ": empty activation dump");
    }
    estimates.push_back(layer_entropy_independent(activations, bins));
    const auto& est = estimates.back();
    layers.push_back({{"source", path},
                      {"samples", est.samples},
                      {"neurons", est.per_neuron.size()},
                      {"per_neuron_bits", est.per_neuron},
                      {"h_ind_bits", est.independent_sum}});
  }
  const CapacityBound bound = capacity_lower_bound(estimates);
  const json report = {{"bins", bins},
                       {"layers", layers},
                       {"d_fp", bound.d_fp},
                       {"d_bin_lower", bound.d_bin_lower}};
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_text(fs::path(*out_dir) / "capacity.json", report.dump(2) + "\n");
  }
  out << report.dump(2) << '\n';
  return kOk;
}

json report_to_json(const EfficiencyReport& r) {
  json layers = json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"d_in", l.d_in},
                      {"d_out", l.d_out},
                      {"param_compression", l.param_compression},
                      {"s_fe", l.accel_feature_extraction},
                      {"s_full", l.accel_full},
                      {"float_cycles", l.float_cycles},
                      {"binary_cycles", l.binary_cycles}});
  }
  return {
      {"nodes", r.stats.nodes},
      {"edges", r.stats.edges},
      {"feature_dim", r.stats.feature_dim},
      {"avg_degree", r.avg_degree},
      {"widths", r.widths},
      {"ops_per_cycle", r.ops_per_cycle},
      {"model_size",
       {{"float_bits", r.model.float_bits},
        {"binary_bits", r.model.binary_bits},
        {"float_kib", bits_to_kib(r.model.float_bits)},
        {"binary_kib", bits_to_kib(r.model.binary_bits)},
        {"ratio", r.model.ratio()}}},
      {"data_size",
       {{"float_bits", r.data.float_bits},
        {"binary_bits", r.data.binary_bits},
        {"float_mib", bits_to_mib(r.data.float_bits)},
        {"binary_mib", bits_to_mib(r.data.binary_bits)},
        {"ratio", r.data.ratio()},
        {"closed_form_ratio", r.data_compression}}},
      {"cycles",
       {{"float", r.float_cycles}, {"binary", r.binary_cycles}, {"ratio", r.cycle_ratio()}}},
      {"layers", layers},
  };
}

struct AnalyzeOptions {
  std::optional<std::string> preset;
  std::optional<std::string> dataset;
  std::optional<std::uint64_t> nodes;
  std::optional<std::uint64_t> edges;
  std::optional<std::uint64_t> features;
  std::optional<std::string> widths;
  std::optional<std::size_t> hidden;
  std::uint64_t ops_per_cycle = kBinaryOpsPerCycle;
  std::optional<std::string> out;
};

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  GraphStats stats;
  std::optional<std::uint64_t> classes;
  const int sources = int(opt.preset.has_value()) + int(opt.dataset.has_value()) +
                      int(opt.nodes.has_value() || opt.edges.has_value() ||
                          opt.features.has_value());
  if (sources != 1) {
    throw UsageError("analyze needs exactly one of --preset, --dataset, or --nodes/--edges/--features");
  }
  if (opt.preset) {
    const auto cs = citation_stats(*opt.preset);
    if (!cs) throw UsageError("unknown preset '" + *opt.preset + "' (cora, citeseer, pubmed)");
    stats = {cs->nodes, cs->edges, cs->features};
    classes = static_cast<std::uint64_t>(cs->classes);
  } else if (opt.dataset) {
    AttributedGraph g;
    try {
      g = load_dataset(DatasetManifest::from_file(*opt.dataset));
    } catch (const LoadError& e) {
      throw DataError(e.what());
    }
    stats = {g.num_nodes(), g.num_edges(), g.feature_dim()};
    classes = static_cast<std::uint64_t>(g.num_classes());
  } else {
    if (!opt.nodes || !opt.edges || !opt.features) {
      throw UsageError("--nodes, --edges and --features must be given together");
    }
    stats = {*opt.nodes, *opt.edges, *opt.features};
  }

  std::vector<std::uint64_t> widths;
  if (opt.widths) {
    for (std::size_t w : parse_widths(*opt.widths)) widths.push_back(w);
  } else if (classes) {
    widths = {stats.feature_dim, opt.hidden.value_or(64), *classes};
  } else {
    throw UsageError("--widths is required when the class count is unknown");
  }
  if (opt.ops_per_cycle == 0) throw UsageError("--ops-per-cycle must be >= 1");

  EfficiencyReport report;
  try {
    report = efficiency_report(widths, stats, opt.ops_per_cycle);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const json j = report_to_json(report);
  if (opt.out) {
    fs::create_directories(*opt.out);
    write_text(fs::path(*opt.out) / "report.json", j.dump(2) + "\n");
  }
  out << j.dump(2) << '\n';
  return kOk;
}

struct BenchOptions {
  std::size_t rows = 512;
  std::size_t inner = 1024;
  std::size_t cols = 64;
  int repeats = 3;
  std::uint64_t seed = 0;
};

DenseMatrix naive_product(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  if (opt.rows == 0 || opt.inner == 0 || opt.cols == 0 || opt.repeats < 1) {
    throw UsageError("bench sizes and --repeats must be >= 1");
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> dist;
  DenseMatrix h(opt.rows, opt.inner);
  DenseMatrix w(opt.inner, opt.cols);
  for (double& v : h.data()) v = dist(rng);
  for (double& v : w.data()) v = dist(rng);
  const auto f = binarize_rows(h);
  const auto b = binarize_columns(w);
  const DenseMatrix h_tilde = f.reconstruct();
  const DenseMatrix w_tilde = b.reconstruct();

  using Clock = std::chrono::steady_clock;
  auto best_ms = [&](auto&& fn) {
    double best = 1e300;
    for (int r = 0; r < opt.repeats; ++r) {
      const auto t0 = Clock::now();
      fn();
      best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    return best;
  };
  DenseMatrix packed;
  DenseMatrix reference;
  const double bin_ms = best_ms([&] { packed = bin_gemm(f, b); });
  const double float_ms = best_ms([&] { reference = naive_product(h_tilde, w_tilde); });
  out << json{{"rows", opt.rows},
              {"inner", opt.inner},
              {"cols", opt.cols},
              {"repeats", opt.repeats},
              {"bin_gemm_ms", bin_ms},
              {"float_ms", float_ms},
              {"speedup", float_ms / bin_ms},
              {"max_abs_diff", max_abs_diff(packed, reference)}}
             .dump(2)
      << '\n';
  return kOk;
}

void add_run_flags(CLI::App* cmd, RunConfig& rc, bool training) {
  cmd->add_option("--config", rc.config_path, "JSON config file; flags override its keys");
  cmd->add_option("--dataset", rc.dataset, "Dataset manifest (JSON)");
  cmd->add_option("--sbm", rc.sbm, "Synthetic SBM parameters (JSON)");
  if (!training) {
    cmd->add_option("--load", rc.load, "Model file written by train");
    cmd->add_option("--split", rc.split, "Mask to evaluate: train, val or test");
    return;
  }
  cmd->add_option("--model", rc.model, "bigcn, gcn or bisage");
  cmd->add_option("--widths", rc.widths, "Layer widths, e.g. 1433,64,7");
  cmd->add_option("--hidden", rc.hidden, "Hidden width when --widths is omitted (default 64)");
  cmd->add_option("--seed", rc.seed, "Random seed");
  cmd->add_option("--ste", rc.ste, "STE gate: grad or input");
  cmd->add_option("--batch-norm", rc.batch_norm, "none, input or every");
  cmd->add_option("--dropout", rc.dropout, "Dropout rate (default 0.4)");
  cmd->add_option("--lr", rc.lr, "Adam learning rate (default 0.001)");
  cmd->add_option("--epochs", rc.epochs, "Maximum epochs (default 1000)");
  cmd->add_option("--patience", rc.patience, "Early-stopping patience (default 100)");
  cmd->add_flag("--no-clip", rc.no_clip, "Do not clip latent weights to [-1, 1]");
  cmd->add_option("--out", rc.out, "Output directory (default ./out)");
  cmd->add_option("--dump-activations", rc.dump_activations,
                  "Write hidden activations of the trained model");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary graph neural networks: training, capacity and efficiency analysis", "bigcn"};
  app.require_subcommand(1);

  RunConfig train_rc;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write metrics");
  add_run_flags(train_cmd, train_rc, true);

  RunConfig eval_rc;
  auto* eval_cmd = app.add_subcommand("eval", "Masked accuracy of a saved model");
  add_run_flags(eval_cmd, eval_rc, false);

  std::vector<std::string> dumps;
  std::size_t bins = 200;
  std::optional<std::string> capacity_out;
  auto* capacity_cmd = app.add_subcommand("capacity", "Entropy-based binary width lower bound");
  capacity_cmd->add_option("dumps", dumps, "Activation dumps, one per hidden layer");
  capacity_cmd->add_option("--activations", dumps, "Activation dump (repeatable)");
  capacity_cmd->add_option("--bins", bins, "Histogram bins per neuron (default 200)");
  capacity_cmd->add_option("--out", capacity_out, "Also write capacity.json here");

  AnalyzeOptions analyze_opt;
  auto* analyze_cmd = app.add_subcommand("analyze", "Model/data size and cycle-operation report");
  analyze_cmd->add_option("--preset", analyze_opt.preset, "cora, citeseer or pubmed");
  analyze_cmd->add_option("--dataset", analyze_opt.dataset, "Take statistics from a manifest");
  analyze_cmd->add_option("--nodes", analyze_opt.nodes, "Node count");
  analyze_cmd->add_option("--edges", analyze_opt.edges, "Undirected edge count");
  analyze_cmd->add_option("--features", analyze_opt.features, "Feature dimension");
  analyze_cmd->add_option("--widths", analyze_opt.widths, "Layer widths, e.g. 1433,64,7");
  analyze_cmd->add_option("--hidden", analyze_opt.hidden, "Hidden width when --widths is omitted");
  analyze_cmd->add_option("--ops-per-cycle", analyze_opt.ops_per_cycle,
                          "Binary operations per cycle (default 64)");
  analyze_cmd->add_option("--out", analyze_opt.out, "Also write report.json here");

  BenchOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "Time bin_gemm against a naive float product");
  bench_cmd->add_option("--rows", bench_opt.rows, "Rows of the feature matrix");
  bench_cmd->add_option("--inner", bench_opt.inner, "Inner dimension");
  bench_cmd->add_option("--cols", bench_opt.cols, "Output columns");
  bench_cmd->add_option("--repeats", bench_opt.repeats, "Timing repetitions (best is kept)");
  bench_cmd->add_option("--seed", bench_opt.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "bigcn: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*train_cmd) return cmd_train(train_rc, out);
    if (*eval_cmd) return cmd_eval(eval_rc, out);
    if (*capacity_cmd) return cmd_capacity(dumps, bins, capacity_out, out);
    if (*analyze_cmd) return cmd_analyze(analyze_opt, out);
    if (*bench_cmd) return cmd_bench(bench_opt, out);
  } catch (const UsageError& e) {
    err << "bigcn: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "bigcn: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const LoadError& e) {
    err << "bigcn: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "bigcn: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  err << "bigcn: no command given\n";
  return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"bigcn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bigcn::cli
