#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bigcn/bitlinalg.hpp"
#include "bigcn/capacity.hpp"
#include "bigcn/dataset.hpp"
#include "bigcn/efficiency.hpp"
#include "bigcn/graph.hpp"
#include "bigcn/model.hpp"

namespace py = pybind11;
using namespace bigcn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_dense(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_numpy(const DenseMatrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

std::vector<Edge> to_edges(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  return edges;
}

py::dict packed_to_dict(const PackedBinMatrix& p) {
  py::dict d;
  d["signs"] = to_numpy(p.signs());
  d["scalars"] = std::vector<double>(p.scalars().begin(), p.scalars().end());
  d["reconstruction"] = to_numpy(p.reconstruct());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<LoadError>(m, "LoadError", PyExc_OSError);

  m.doc() = "Packed binary kernels, Bi-GCN training and cost analysis";

  m.def(
      "binarize_vector",
      [](const std::vector<double>& v) {
        auto [bits, alpha] = binarize_vector(v);
        return py::make_tuple(unpack(bits), alpha);
      },
      py::arg("v"), "Returns (signs, alpha) minimising ||v - alpha * signs||.");

  m.def(
      "xnor_dot",
      [](const std::vector<int>& a, const std::vector<int>& b) {
        return xnor_popcount_dot(pack(a), pack(b));
      },
      py::arg("a"), py::arg("b"));

  m.def("binarize_rows", [](const Array& h) { return packed_to_dict(binarize_rows(to_dense(h))); },
        py::arg("h"));
  m.def("binarize_columns",
        [](const Array& w) { return packed_to_dict(binarize_columns(to_dense(w))); },
        py::arg("w"));
  m.def(
      "bin_gemm",
      [](const Array& h, const Array& w) {
        return to_numpy(bin_gemm(binarize_rows(to_dense(h)), binarize_columns(to_dense(w))));
      },
      py::arg("h"), py::arg("w"), "Binarizes h by rows and w by columns, then XNOR-multiplies.");

  m.def(
      "normalize_adjacency",
      [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        const auto e = to_edges(edges);
        return to_numpy(normalize_adjacency(n, e).csr.to_dense());
      },
      py::arg("num_nodes"), py::arg("edges"));
  m.def(
      "aggregate",
      [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
         const Array& z) {
        const auto e = to_edges(edges);
        return to_numpy(aggregate(normalize_adjacency(n, e),
                                  to_dense(z)));
      },
      py::arg("num_nodes"), py::arg("edges"), py::arg("z"));

  m.def("param_compression_ratio", &param_compression_ratio, py::arg("d_in"));
  m.def("data_compression_ratio", &data_compression_ratio, py::arg("d"));
  m.def(
      "acceleration_ratios",
      [](double d_in, double avg_degree, double k) {
        const auto r = acceleration_ratios(d_in, avg_degree, k);
        return py::make_tuple(r.feature_extraction, r.full);
      },
      py::arg("d_in"), py::arg("avg_degree"), py::arg("ops_per_cycle") = 64.0);

  py::class_<EfficiencyReport>(m, "EfficiencyReport")
      .def_property_readonly("float_cycles", [](const EfficiencyReport& r) { return r.float_cycles; })
      .def_property_readonly("binary_cycles", [](const EfficiencyReport& r) { return r.binary_cycles; })
      .def_property_readonly("cycle_ratio", &EfficiencyReport::cycle_ratio)
      .def_property_readonly("model_float_bits", [](const EfficiencyReport& r) { return r.model.float_bits; })
      .def_property_readonly("model_binary_bits", [](const EfficiencyReport& r) { return r.model.binary_bits; })
      .def_property_readonly("data_float_bits", [](const EfficiencyReport& r) { return r.data.float_bits; })
      .def_property_readonly("data_binary_bits", [](const EfficiencyReport& r) { return r.data.binary_bits; });
  m.def(
      "efficiency_report",
      [](const std::vector<std::uint64_t>& widths, std::uint64_t nodes, std::uint64_t edges,
         std::uint64_t k) {
        return efficiency_report(widths, GraphStats{nodes, edges, widths.front()}, k);
      },
      py::arg("widths"), py::arg("nodes"), py::arg("edges"), py::arg("ops_per_cycle") = 64);

  m.def(
      "layer_entropy",
      [](const Array& activations, std::size_t bins) {
        const auto e = layer_entropy_independent(to_dense(activations), bins);
        return py::make_tuple(e.per_neuron, e.independent_sum);
      },
      py::arg("activations"), py::arg("bins") = 200);
  m.def(
      "capacity_lower_bound",
      [](const std::vector<double>& layer_entropies) {
        return capacity_lower_bound(std::span<const double>(layer_entropies)).d_bin_lower;
      },
      py::arg("layer_entropies"));

  py::class_<AttributedGraph>(m, "AttributedGraph")
      .def_property_readonly("num_nodes", &AttributedGraph::num_nodes)
      .def_property_readonly("num_edges", &AttributedGraph::num_edges)
      .def_property_readonly("feature_dim", &AttributedGraph::feature_dim)
      .def_property_readonly("num_classes", &AttributedGraph::num_classes)
      .def_property_readonly("features", [](const AttributedGraph& g) { return to_numpy(g.features()); })
      .def_property_readonly("labels", [](const AttributedGraph& g) {
        return std::vector<int>(g.labels().begin(), g.labels().end());
      })
      .def("count", [](const AttributedGraph& g, const std::string& split) {
        if (split == "train") return g.count(Split::kTrain);
        if (split == "val") return g.count(Split::kVal);
        if (split == "test") return g.count(Split::kTest);
        throw std::invalid_argument("split must be train, val or test");
      }, py::arg("split"));

  m.def(
      "load_dataset",
      [](const std::string& manifest) { return load_dataset(DatasetManifest::from_file(manifest)); },
      py::arg("manifest"));
  m.def(
      "generate_sbm",
      [](std::size_t nodes_per_class, int num_classes, double p_in, double p_out,
         std::size_t feature_dim, double signal, std::size_t train_per_class,
         std::size_t val_per_class, std::uint64_t seed) {
        SbmParams p;
        p.nodes_per_class = nodes_per_class;
        p.num_classes = num_classes;
        p.p_in = p_in;
        p.p_out = p_out;
        p.feature_dim = feature_dim;
        p.signal = signal;
        p.train_per_class = train_per_class;
        p.val_per_class = val_per_class;
        p.seed = seed;
        return generate_sbm(p);
      },
      py::arg("nodes_per_class") = 100, py::arg("num_classes") = 7, py::arg("p_in") = 0.05,
      py::arg("p_out") = 0.005, py::arg("feature_dim") = 70, py::arg("signal") = 1.0,
      py::arg("train_per_class") = 20, py::arg("val_per_class") = 30, py::arg("seed") = 0);

  m.def(
      "train",
      [](const AttributedGraph& g, const std::string& model, std::size_t hidden, int epochs,
         int patience, std::uint64_t seed, const std::string& ste) {
        ModelConfig cfg;
        cfg.type = parse_layer_type(model);
        cfg.ste = parse_ste_mode(ste);
        cfg.widths = {g.feature_dim(), hidden, static_cast<std::size_t>(g.num_classes())};
        cfg.max_epochs = epochs;
        cfg.patience = patience;
        cfg.seed = seed;
        const TrainResult r = train(cfg, g, GraphOperators::build(g));
        py::list trace;
        for (const auto& e : r.trace) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["val_loss"] = e.val_loss;
          d["val_acc"] = e.val_acc;
          trace.append(d);
        }
        py::dict out;
        out["test_acc"] = r.test_acc;
        out["best_epoch"] = r.best_epoch;
        out["trace"] = trace;
        return out;
      },
      py::arg("graph"), py::arg("model") = "bigcn", py::arg("hidden") = 64,
      py::arg("epochs") = 1000, py::arg("patience") = 100, py::arg("seed") = 0,
      py::arg("ste") = "grad");
}
