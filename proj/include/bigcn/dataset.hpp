#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bigcn/graph.hpp"

namespace bigcn {

/// Locations and declared sizes of a dataset on disk. Relative paths in a
/// manifest file are resolved against the manifest's directory.
///
/// Files:
///   edges.txt     one "u v" pair per line, 0-indexed
///   features.bin  "BGNF", u32 N, u32 d (little-endian), row-major float32
///   labels.txt    one integer class per line
///   masks.txt     one character per node: t (train), v (val), s (test), - (unused)
struct DatasetManifest {
  std::string name;
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path masks;
  std::size_t num_nodes = 0;
  std::size_t feature_dim = 0;
  int num_classes = 0;

  static DatasetManifest from_file(const std::filesystem::path& manifest_json);
  void write(const std::filesystem::path& manifest_json) const;
};

enum class LoadErrorKind {
  kMissingFile,
  kParse,
  kDimensionMismatch,
  kLabelOutOfRange,
  kOverlappingMasks,
};

class LoadError : public std::runtime_error {
 public:
  LoadError(LoadErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  LoadErrorKind kind() const { return kind_; }

 private:
  LoadErrorKind kind_;
};

AttributedGraph load_dataset(const DatasetManifest& manifest);
/// Writes the four data files plus `manifest.json` into `dir`.
DatasetManifest save_dataset(const AttributedGraph& graph, const std::filesystem::path& dir,
                             const std::string& name);

void write_features(const std::filesystem::path& path, const DenseMatrix& features);
DenseMatrix read_features(const std::filesystem::path& path);

/// Published statistics of the citation benchmarks (Cora, CiteSeer, PubMed).
struct CitationStats {
  std::string_view name;
  std::size_t nodes;
  std::size_t edges;
  int classes;
  std::size_t features;
};

/// Lookup by lower-case name; nullopt when unknown.
std::optional<CitationStats> citation_stats(std::string_view name);

/// Planted-partition benchmark with class-block feature signal.
struct SbmParams {
  std::size_t nodes_per_class = 100;
  int num_classes = 7;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t feature_dim = 70;
  double signal = 1.0;  // added to the class's coordinate block
  std::size_t train_per_class = 20;
  std::size_t val_per_class = 30;
  std::uint64_t seed = 0;

  static SbmParams from_file(const std::filesystem::path& json_path);
  void validate() const;
};

/// Node i belongs to class i / nodes_per_class. Features are the class
/// indicator block scaled by `signal` plus unit Gaussian noise, rounded to
/// float32 so they survive a save/load roundtrip exactly.
AttributedGraph generate_sbm(const SbmParams& params);

}  // namespace bigcn
