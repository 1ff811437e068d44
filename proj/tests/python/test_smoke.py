import math

import numpy as np
import pytest

import bigcn


def test_binarize_vector_sign_and_scale():
    signs, alpha = bigcn.binarize_vector([0.5, -1.5, 0.0, 2.0])
    assert signs == [1, -1, 1, 1]
    assert alpha == pytest.approx(1.0)


def test_xnor_dot_matches_integer_dot():
    rng = np.random.default_rng(3)
    for n in (1, 63, 64, 65, 200):
        a = rng.choice([-1, 1], size=n).tolist()
        b = rng.choice([-1, 1], size=n).tolist()
        assert bigcn.xnor_dot(a, b) == int(np.dot(a, b))


def test_bin_gemm_matches_reconstructed_product():
    rng = np.random.default_rng(7)
    h = rng.standard_normal((9, 130))
    w = rng.standard_normal((130, 5))
    f = bigcn.binarize_rows(h)
    b = bigcn.binarize_columns(w)
    expected = f["reconstruction"] @ b["reconstruction"]
    np.testing.assert_allclose(bigcn.bin_gemm(h, w), expected, atol=1e-9)


def test_two_node_normalized_adjacency():
    np.testing.assert_allclose(bigcn.normalize_adjacency(2, [(0, 1)]), np.full((2, 2), 0.5))


def test_isolated_node_keeps_self_loop():
    a = bigcn.normalize_adjacency(3, [(0, 1)])
    assert a[2, 2] == pytest.approx(1.0)
    assert a[2, 0] == 0.0 and a[0, 2] == 0.0


def test_out_of_range_edge_raises():
    with pytest.raises(ValueError):
        bigcn.normalize_adjacency(2, [(0, 5)])


def test_cora_cycle_counts():
    r = bigcn.efficiency_report([1433, 64, 7], 2708, 5429)
    assert r.float_cycles == 249_954_739
    assert r.binary_cycles == 4_669_515
    assert r.model_float_bits == 2_949_120
    assert r.model_binary_bits == 94_432


def test_acceleration_ratio():
    s_fe, s_full = bigcn.acceleration_ratios(1433, 2 * 5429 / 2708)
    assert s_fe == pytest.approx(64 * 1433 / (1433 + 128))
    assert 1.0 < s_full < s_fe


def test_uniform_entropy_and_bound():
    x = np.tile(np.arange(8, dtype=float), 4)[:, None]
    per_neuron, total = bigcn.layer_entropy(x, bins=8)
    assert per_neuron[0] == pytest.approx(3.0)
    assert total == pytest.approx(3.0)
    assert bigcn.capacity_lower_bound([97.2, 40.0]) == 98
    assert math.isclose(bigcn.param_compression_ratio(32), 16.0)


def test_sbm_training_runs_and_is_deterministic():
    g = bigcn.generate_sbm(nodes_per_class=30, num_classes=3, feature_dim=30,
                           train_per_class=5, val_per_class=5, seed=2)
    assert g.num_nodes == 90 and g.num_classes == 3
    a = bigcn.train(g, hidden=16, epochs=15, seed=5)
    b = bigcn.train(g, hidden=16, epochs=15, seed=5)
    assert a["test_acc"] == b["test_acc"]
    assert len(a["trace"]) == 15


def _fake_planetoid(raw, rng):
    """Twelve nodes, three classes: 3 train, 4 val (of the 500 slot), 5 test."""
    import pickle

    import scipy.sparse as sp

    n_all, n_test, d, c = 7, 5, 4, 3
    eye = np.eye(c)
    allx = sp.csr_matrix(rng.integers(0, 2, size=(n_all, d)).astype(float))
    ally = eye[rng.integers(0, c, size=n_all)]
    tx = sp.csr_matrix(rng.integers(0, 2, size=(n_test, d)).astype(float))
    ty = eye[rng.integers(0, c, size=n_test)]
    graph = {i: [(i + 1) % 12, i] for i in range(12)}
    graph[0].append(1)
    parts = {"x": allx[:3], "y": ally[:3], "allx": allx, "ally": ally, "tx": tx, "ty": ty, "graph": graph}
    for k, v in parts.items():
        with open(raw / f"ind.cora.{k}", "wb") as f:
            pickle.dump(v, f)
    (raw / "ind.cora.test.index").write_text("\n".join(str(i) for i in (11, 7, 9, 8, 10)))
    return allx, tx, ally, ty


def test_planetoid_converter_roundtrip(tmp_path):
    import importlib.util
    from pathlib import Path

    script = Path(__file__).resolve().parents[2] / "tools" / "planetoid_to_bigcn.py"
    spec = importlib.util.spec_from_file_location("planetoid_to_bigcn", script)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)

    raw = tmp_path / "raw"
    raw.mkdir()
    allx, tx, ally, ty = _fake_planetoid(raw, np.random.default_rng(0))
    n, e, d, c = mod.convert(raw, "cora", tmp_path / "out")
    assert (n, e, d, c) == (12, 12, 4, 3)

    g = bigcn.load_dataset(str(tmp_path / "out" / "manifest.json"))
    assert g.num_nodes == 12 and g.num_edges == 12
    assert (g.count("train"), g.count("val"), g.count("test")) == (3, 4, 5)
    # Test rows are stored in test.index order: node 11 holds the first tx row.
    np.testing.assert_array_equal(g.features[11], np.asarray(tx[0].todense()).ravel())
    np.testing.assert_array_equal(g.features[:7], np.asarray(allx.todense()))
    assert g.labels[11] == int(ty[0].argmax())


def test_load_dataset_missing_manifest(tmp_path):
    with pytest.raises(bigcn.LoadError):
        bigcn.load_dataset(str(tmp_path / "nope.json"))
