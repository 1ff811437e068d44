#include "bigcn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"

namespace bigcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFeatureMagic = "BGNF";

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw LoadError(LoadErrorKind::kMissingFile, "cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<Edge> read_edges(const fs::path& path, std::size_t num_nodes) {
  auto in = open_input(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto split = text.find_first_of(" \t");
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    if (split == std::string_view::npos || !parse_number(trim(text.substr(0, split)), u) ||
        !parse_number(trim(text.substr(split + 1)), v)) {
      throw LoadError(LoadErrorKind::kParse,
                      path.string() + ":" + std::to_string(lineno) + ": expected 'u v'");
    }
    if (u >= num_nodes || v >= num_nodes) {
      throw LoadError(LoadErrorKind::kDimensionMismatch,
                      path.string() + ":" + std::to_string(lineno) + ": endpoint out of range for " +
                          std::to_string(num_nodes) + " nodes");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

std::vector<int> read_labels(const fs::path& path, std::size_t num_nodes, int num_classes) {
  auto in = open_input(path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    int label = 0;
    if (!parse_number(text, label)) {
      throw LoadError(LoadErrorKind::kParse, path.string() + ": bad label '" +
                                                 std::string(text) + "'");
    }
    if (label < 0 || label >= num_classes) {
      throw LoadError(LoadErrorKind::kLabelOutOfRange,
                      path.string() + ": label " + std::to_string(label) + " of node " +
                          std::to_string(labels.size()) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    }
    labels.push_back(label);
  }
  if (labels.size() != num_nodes) {
    throw LoadError(LoadErrorKind::kDimensionMismatch,
                    path.string() + ": " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(num_nodes) + " nodes");
  }
  return labels;
}

std::vector<Split> read_masks(const fs::path& path, std::size_t num_nodes) {
  auto in = open_input(path);
  std::vector<Split> splits;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    Split split = Split::kNone;
    int flags = 0;
    for (char c : text) {
      switch (c) {
        case 't': split = Split::kTrain; ++flags; break;
        case 'v': split = Split::kVal; ++flags; break;
        case 's': split = Split::kTest; ++flags; break;
        case '-': break;
        default:
          throw LoadError(LoadErrorKind::kParse,
                          path.string() + ": unknown mask flag '" + std::string(1, c) + "'");
      }
    }
    if (flags > 1) {
      throw LoadError(LoadErrorKind::kOverlappingMasks,
                      path.string() + ": node " + std::to_string(splits.size()) +
                          " is in more than one split ('" + std::string(text) + "')");
    }
    splits.push_back(split);
  }
  if (splits.size() != num_nodes) {
    throw LoadError(LoadErrorKind::kDimensionMismatch,
                    path.string() + ": " + std::to_string(splits.size()) + " mask entries for " +
                        std::to_string(num_nodes) + " nodes");
  }
  return splits;
}

char split_flag(Split s) {
  switch (s) {
    case Split::kTrain: return 't';
    case Split::kVal: return 'v';
    case Split::kTest: return 's';
    case Split::kNone: return '-';
  }
  return '-';
}

}  // namespace

DatasetManifest DatasetManifest::from_file(const fs::path& manifest_json) {
  auto in = open_input(manifest_json);
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    const fs::path base = manifest_json.parent_path();
    auto resolve = [&](const char* key) {
      fs::path p = j.at(key).get<std::string>();
      return p.is_absolute() ? p : base / p;
    };
    m.name = j.value("name", manifest_json.stem().string());
    m.edges = resolve("edges");
    m.features = resolve("features");
    m.labels = resolve("labels");
    m.masks = resolve("masks");
    m.num_nodes = j.at("num_nodes").get<std::size_t>();
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.num_classes = j.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw LoadError(LoadErrorKind::kParse, manifest_json.string() + ": " + e.what());
  }
  return m;
}

void DatasetManifest::write(const fs::path& manifest_json) const {
  const json j = {{"name", name},
                  {"edges", edges.filename().string()},
                  {"features", features.filename().string()},
                  {"labels", labels.filename().string()},
                  {"masks", masks.filename().string()},
                  {"num_nodes", num_nodes},
                  {"feature_dim", feature_dim},
                  {"num_classes", num_classes}};
  std::ofstream out(manifest_json);
  if (!out) throw std::runtime_error("cannot open " + manifest_json.string() + " for writing");
  out << j.dump(2) << '\n';
}

void write_features(const fs::path& path, const DenseMatrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::write_magic(out, kFeatureMagic);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.rows()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.cols()));
  for (double v : features.data()) io::write_le<float>(out, static_cast<float>(v));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DenseMatrix read_features(const fs::path& path) {
  auto in = open_input(path, std::ios::binary);
  try {
    if (!io::read_magic(in, kFeatureMagic)) {
      throw LoadError(LoadErrorKind::kParse, path.string() + ": missing BGNF header");
    }
    const auto rows = io::read_le<std::uint32_t>(in);
    const auto cols = io::read_le<std::uint32_t>(in);
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) v = io::read_le<float>(in);
    return DenseMatrix(rows, cols, std::move(values));
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(LoadErrorKind::kParse, path.string() + ": " + e.what());
  }
}

AttributedGraph load_dataset(const DatasetManifest& manifest) {
  DenseMatrix features = read_features(manifest.features);
  if (features.rows() != manifest.num_nodes || features.cols() != manifest.feature_dim) {
    throw LoadError(LoadErrorKind::kDimensionMismatch,
                    manifest.features.string() + ": features are " +
                        std::to_string(features.rows()) + "x" + std::to_string(features.cols()) +
                        ", manifest declares " + std::to_string(manifest.num_nodes) + "x" +
                        std::to_string(manifest.feature_dim));
  }
  auto edges = read_edges(manifest.edges, manifest.num_nodes);
  auto labels = read_labels(manifest.labels, manifest.num_nodes, manifest.num_classes);
  auto splits = read_masks(manifest.masks, manifest.num_nodes);
  try {
    return AttributedGraph(manifest.num_nodes, std::move(edges), std::move(features),
                           std::move(labels), std::move(splits), manifest.num_classes);
  } catch (const std::invalid_argument& e) {
    throw LoadError(LoadErrorKind::kDimensionMismatch, manifest.name + ": " + e.what());
  }
}

DatasetManifest save_dataset(const AttributedGraph& graph, const fs::path& dir,
                             const std::string& name) {
  fs::create_directories(dir);
  DatasetManifest m{name,
                    dir / "edges.txt",
                    dir / "features.bin",
                    dir / "labels.txt",
                    dir / "masks.txt",
                    graph.num_nodes(),
                    graph.feature_dim(),
                    graph.num_classes()};
  {
    std::ofstream out(m.edges);
    for (const auto& [u, v] : graph.edges()) out << u << ' ' << v << '\n';
  }
  write_features(m.features, graph.features());
  {
    std::ofstream out(m.labels);
    for (int l : graph.labels()) out << l << '\n';
  }
  {
    std::ofstream out(m.masks);
    for (Split s : graph.splits()) out << split_flag(s) << '\n';
  }
  m.write(dir / "manifest.json");
  return m;
}

std::optional<CitationStats> citation_stats(std::string_view name) {
  static constexpr CitationStats kTable[] = {
      {"cora", 2708, 5429, 7, 1433},
      {"citeseer", 3327, 4732, 6, 3703},
      {"pubmed", 19711, 44338, 3, 500},
  };
  for (const auto& entry : kTable) {
    if (entry.name == name) return entry;
  }
  return std::nullopt;
}

SbmParams SbmParams::from_file(const fs::path& json_path) {
  auto in = open_input(json_path);
  SbmParams p;
  try {
    const json j = json::parse(in);
    p.nodes_per_class = j.value("nodes_per_class", p.nodes_per_class);
    p.num_classes = j.value("num_classes", p.num_classes);
    p.p_in = j.value("p_in", p.p_in);
    p.p_out = j.value("p_out", p.p_out);
    p.feature_dim = j.value("feature_dim", p.feature_dim);
    p.signal = j.value("signal", p.signal);
    p.train_per_class = j.value("train_per_class", p.train_per_class);
    p.val_per_class = j.value("val_per_class", p.val_per_class);
    p.seed = j.value("seed", p.seed);
  } catch (const json::exception& e) {
    throw LoadError(LoadErrorKind::kParse, json_path.string() + ": " + e.what());
  }
  return p;
}

void SbmParams::validate() const {
  if (num_classes < 2) throw std::invalid_argument("SbmParams: need at least 2 classes");
  if (nodes_per_class < 1) throw std::invalid_argument("SbmParams: nodes_per_class must be >= 1");
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0)) {
    throw std::invalid_argument("SbmParams: require 0 <= p_out <= p_in <= 1");
  }
  if (!(signal >= 0.0)) throw std::invalid_argument("SbmParams: signal must be >= 0");
  if (feature_dim < static_cast<std::size_t>(num_classes)) {
    throw std::invalid_argument("SbmParams: feature_dim must be >= num_classes");
  }
  if (train_per_class + val_per_class > nodes_per_class) {
    throw std::invalid_argument("SbmParams: train + val per class exceeds nodes per class");
  }
}

AttributedGraph generate_sbm(const SbmParams& params) {
  params.validate();
  const auto classes = static_cast<std::size_t>(params.num_classes);
  const std::size_t n = params.nodes_per_class * classes;
  std::mt19937_64 rng(params.seed);

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / params.nodes_per_class);

  std::vector<Edge> edges;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? params.p_in : params.p_out;
      if (unit(rng) < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  const std::size_t block = params.feature_dim / classes;
  std::normal_distribution<double> noise(0.0, 1.0);
  DenseMatrix features(n, params.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    for (std::size_t k = 0; k < params.feature_dim; ++k) {
      const bool in_block = k >= c * block && k < (c + 1) * block;
      const double x = (in_block ? params.signal : 0.0) + noise(rng);
      features(i, k) = static_cast<double>(static_cast<float>(x));
    }
  }

  std::vector<Split> splits(n, Split::kTest);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::size_t> members(params.nodes_per_class);
    for (std::size_t k = 0; k < members.size(); ++k) members[k] = c * params.nodes_per_class + k;
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < params.train_per_class; ++k) splits[members[k]] = Split::kTrain;
    for (std::size_t k = 0; k < params.val_per_class; ++k) {
      splits[members[params.train_per_class + k]] = Split::kVal;
    }
  }
  return AttributedGraph(n, std::move(edges), std::move(features), std::move(labels),
                         std::move(splits), params.num_classes);
}

}  // namespace bigcn
