#!/usr/bin/env python3
"""Convert raw Planetoid files (ind.<name>.x, .tx, .allx, .y, .ty, .ally,
.graph, .test.index) into the bigcn on-disk dataset format.

The standard split is kept: the first 20 * C nodes train, the next 500
validate, and the nodes listed in test.index are the 1000 test nodes.

    python tools/planetoid_to_bigcn.py --raw planetoid/data --name cora --out data/cora
"""

import argparse
import json
import pickle
import struct
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def _load(raw, name, part):
    with open(raw / f"ind.{name}.{part}", "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert(raw, name, out):
    raw, out = Path(raw), Path(out)
    x, tx, allx, y, ty, ally, graph = (_load(raw, name, p) for p in ("x", "tx", "allx", "y", "ty", "ally", "graph"))
    test_index = [int(line) for line in (raw / f"ind.{name}.test.index").read_text().split()]
    test_sorted = sorted(test_index)

    if name == "citeseer":
        # Some test nodes are isolated and missing from tx/ty; pad with zeros.
        full = range(test_sorted[0], test_sorted[-1] + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[[i - test_sorted[0] for i in test_sorted], :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[[i - test_sorted[0] for i in test_sorted], :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_index, :] = features[test_sorted, :]
    labels = np.vstack((ally, ty))
    labels[test_index, :] = labels[test_sorted, :]

    n, d = features.shape
    num_classes = labels.shape[1]
    y_idx = labels.argmax(axis=1)

    splits = ["-"] * n
    n_train = y.shape[0]
    for i in range(n_train):
        splits[i] = "t"
    for i in range(n_train, min(n, n_train + 500)):
        splits[i] = "v"
    for i in test_index:
        if i < n:
            splits[i] = "s"

    out.mkdir(parents=True, exist_ok=True)
    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))
    (out / "edges.txt").write_text("".join(f"{u} {v}\n" for u, v in sorted(edges)))
    (out / "labels.txt").write_text("".join(f"{c}\n" for c in y_idx))
    (out / "masks.txt").write_text("".join(f"{s}\n" for s in splits))
    dense = np.asarray(features.todense(), dtype="<f4")
    with open(out / "features.bin", "wb") as f:
        f.write(b"BGNF")
        f.write(struct.pack("<II", n, d))
        f.write(dense.tobytes(order="C"))
    manifest = {
        "name": name,
        "edges": "edges.txt",
        "features": "features.bin",
        "labels": "labels.txt",
        "masks": "masks.txt",
        "num_nodes": n,
        "feature_dim": d,
        "num_classes": num_classes,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return n, len(edges), d, num_classes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw", required=True, help="directory holding the ind.<name>.* files")
    ap.add_argument("--name", required=True, choices=["cora", "citeseer", "pubmed"])
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    n, e, d, c = convert(args.raw, args.name, args.out)
    print(f"{args.name}: {n} nodes, {e} undirected edges, {d} features, {c} classes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
