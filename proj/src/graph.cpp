#include "bigcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bigcn {

namespace {

std::vector<std::vector<NodeId>> neighbor_lists(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::vector<NodeId>> nbrs(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw std::invalid_argument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                  ") out of range for " + std::to_string(n) + " nodes");
    }
    if (u == v) continue;
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  for (auto& l : nbrs) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return nbrs;
}

}  // namespace

AttributedGraph::AttributedGraph(std::size_t num_nodes, std::vector<Edge> edges,
                                 DenseMatrix features, std::vector<int> labels,
                                 std::vector<Split> splits, int num_classes)
    : num_nodes_(num_nodes),
      features_(std::move(features)),
      labels_(std::move(labels)),
      splits_(std::move(splits)),
      num_classes_(num_classes) {
  if (features_.rows() != num_nodes_) {
    throw std::invalid_argument("AttributedGraph: feature rows " +
                                std::to_string(features_.rows()) + " != node count " +
                                std::to_string(num_nodes_));
  }
  if (features_.cols() < 1) throw std::invalid_argument("AttributedGraph: feature dim < 1");
  if (num_classes_ < 2) throw std::invalid_argument("AttributedGraph: fewer than 2 classes");
  if (labels_.size() != num_nodes_) {
    throw std::invalid_argument("AttributedGraph: label count mismatch");
  }
  if (splits_.empty()) splits_.assign(num_nodes_, Split::kNone);
  if (splits_.size() != num_nodes_) {
    throw std::invalid_argument("AttributedGraph: split count mismatch");
  }
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw std::invalid_argument("AttributedGraph: label " + std::to_string(labels_[i]) +
                                  " of node " + std::to_string(i) + " out of range");
    }
  }
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes_ || v >= num_nodes_) {
      throw std::invalid_argument("AttributedGraph: edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ") out of range");
    }
  }
  edges_ = canonicalize(std::move(edges));
}

std::vector<Edge> AttributedGraph::canonicalize(std::vector<Edge> edges) {
  std::erase_if(edges, [](const Edge& e) { return e.first == e.second; });
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<bool> AttributedGraph::mask(Split which) const {
  std::vector<bool> out(num_nodes_);
  for (std::size_t i = 0; i < num_nodes_; ++i) out[i] = splits_[i] == which;
  return out;
}

std::size_t AttributedGraph::count(Split which) const {
  return static_cast<std::size_t>(std::count(splits_.begin(), splits_.end(), which));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
  const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<NodeId>(c));
  if (it == end || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = row_offsets[r]; p < row_offsets[r + 1]; ++p)
      out(r, col_indices[p]) = values[p];
  return out;
}

DenseMatrix spmm(const CsrMatrix& s, const DenseMatrix& z) {
  if (z.rows() != s.cols) {
    throw std::invalid_argument("spmm: operand has " + std::to_string(z.rows()) +
                                " rows, expected " + std::to_string(s.cols));
  }
  DenseMatrix out(s.rows, z.cols());
  for (std::size_t r = 0; r < s.rows; ++r) {
    auto dst = out.row(r);
    for (std::size_t p = s.row_offsets[r]; p < s.row_offsets[r + 1]; ++p) {
      const double w = s.values[p];
      const auto src = z.row(s.col_indices[p]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

DenseMatrix spmm_transposed(const CsrMatrix& s, const DenseMatrix& z) {
  if (z.rows() != s.rows) {
    throw std::invalid_argument("spmm_transposed: operand has " + std::to_string(z.rows()) +
                                " rows, expected " + std::to_string(s.rows));
  }
  DenseMatrix out(s.cols, z.cols());
  for (std::size_t r = 0; r < s.rows; ++r) {
    const auto src = z.row(r);
    for (std::size_t p = s.row_offsets[r]; p < s.row_offsets[r + 1]; ++p) {
      const double w = s.values[p];
      auto dst = out.row(s.col_indices[p]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

NormalizedAdjacency normalize_adjacency(const AttributedGraph& g) {
  return normalize_adjacency(g.num_nodes(), g.edges());
}

NormalizedAdjacency normalize_adjacency(std::size_t num_nodes, std::span<const Edge> edges) {
  auto nbrs = neighbor_lists(num_nodes, edges);
  std::vector<double> inv_sqrt_deg(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(nbrs[i].size() + 1));
  }

  NormalizedAdjacency adj;
  CsrMatrix& csr = adj.csr;
  csr.rows = csr.cols = num_nodes;
  csr.row_offsets.reserve(num_nodes + 1);
  csr.row_offsets.push_back(0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    auto& row = nbrs[i];
    row.insert(std::upper_bound(row.begin(), row.end(), static_cast<NodeId>(i)),
               static_cast<NodeId>(i));
    for (NodeId j : row) {
      csr.col_indices.push_back(j);
      csr.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    csr.row_offsets.push_back(csr.col_indices.size());
  }
  return adj;
}

DenseMatrix aggregate(const NormalizedAdjacency& adj, const DenseMatrix& z) {
  if (z.rows() != adj.num_nodes()) {
    throw std::invalid_argument("aggregate: operand has " + std::to_string(z.rows()) +
                                " rows, graph has " + std::to_string(adj.num_nodes()) +
                                " nodes");
  }
  return spmm(adj.csr, z);
}

CsrMatrix mean_neighbor_operator(std::size_t num_nodes, std::span<const Edge> edges) {
  const auto nbrs = neighbor_lists(num_nodes, edges);
  CsrMatrix csr;
  csr.rows = csr.cols = num_nodes;
  csr.row_offsets.reserve(num_nodes + 1);
  csr.row_offsets.push_back(0);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const double w = nbrs[i].empty() ? 0.0 : 1.0 / static_cast<double>(nbrs[i].size());
    for (NodeId j : nbrs[i]) {
      csr.col_indices.push_back(j);
      csr.values.push_back(w);
    }
    csr.row_offsets.push_back(csr.col_indices.size());
  }
  return csr;
}

}  // namespace bigcn
