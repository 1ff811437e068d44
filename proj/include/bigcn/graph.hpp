#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bigcn/dense_matrix.hpp"

namespace bigcn {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

enum class Split : std::uint8_t { kNone, kTrain, kVal, kTest };

/// Undirected attributed graph. Edges are stored once with u < v; self-loops
/// and duplicates are removed on construction.
class AttributedGraph {
 public:
  AttributedGraph() = default;
  AttributedGraph(std::size_t num_nodes, std::vector<Edge> edges, DenseMatrix features,
                  std::vector<int> labels, std::vector<Split> splits, int num_classes);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const DenseMatrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Split>& splits() const { return splits_; }

  std::vector<bool> mask(Split which) const;
  std::size_t count(Split which) const;

  /// Deduplicates and drops self-loops; returns canonical (u < v) sorted edges.
  static std::vector<Edge> canonicalize(std::vector<Edge> edges);

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  DenseMatrix features_;
  std::vector<int> labels_;
  std::vector<Split> splits_;
  int num_classes_ = 0;
};

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<NodeId> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  /// Stored value at (r, c), or 0 when absent.
  double at(std::size_t r, std::size_t c) const;
  DenseMatrix to_dense() const;
};

/// out = S · z
DenseMatrix spmm(const CsrMatrix& s, const DenseMatrix& z);
/// out = Sᵀ · z
DenseMatrix spmm_transposed(const CsrMatrix& s, const DenseMatrix& z);

/// Ã = D̂^{-1/2} (A + I) D̂^{-1/2} in CSR form.
struct NormalizedAdjacency {
  CsrMatrix csr;
  std::size_t num_nodes() const { return csr.rows; }
};

NormalizedAdjacency normalize_adjacency(const AttributedGraph& g);
NormalizedAdjacency normalize_adjacency(std::size_t num_nodes, std::span<const Edge> edges);

/// Ã · z
DenseMatrix aggregate(const NormalizedAdjacency& adj, const DenseMatrix& z);

/// Row-normalized neighbor operator (mean over neighbors, no self-loop).
/// Rows of isolated nodes are empty, so their aggregate is zero.
CsrMatrix mean_neighbor_operator(std::size_t num_nodes, std::span<const Edge> edges);

}  // namespace bigcn
