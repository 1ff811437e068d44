"""Binary graph convolutional networks: packed XNOR kernels, training, capacity and cost analysis."""

from ._core import (
    AttributedGraph,
    EfficiencyReport,
    acceleration_ratios,
    aggregate,
    bin_gemm,
    binarize_columns,
    binarize_rows,
    binarize_vector,
    capacity_lower_bound,
    data_compression_ratio,
    efficiency_report,
    generate_sbm,
    layer_entropy,
    load_dataset,
    LoadError,
    normalize_adjacency,
    param_compression_ratio,
    train,
    xnor_dot,
)

__all__ = [
    "AttributedGraph",
    "EfficiencyReport",
    "acceleration_ratios",
    "aggregate",
    "bin_gemm",
    "binarize_columns",
    "binarize_rows",
    "binarize_vector",
    "capacity_lower_bound",
    "data_compression_ratio",
    "efficiency_report",
    "generate_sbm",
    "layer_entropy",
    "load_dataset",
    "LoadError",
    "normalize_adjacency",
    "param_compression_ratio",
    "train",
    "xnor_dot",
]
