import json

import numpy as np
import pytest

from graphadv import (
    Dataset,
    SparseMatrix,
    ValidationError,
    generate_sbm,
    load_dataset,
    save_dataset,
)

from conftest import toy_dataset


def dataset_equal(a: Dataset, b: Dataset) -> bool:
    return (
        a.name == b.name
        and a.num_nodes == b.num_nodes
        and a.num_features == b.num_features
        and a.num_classes == b.num_classes
        and a.adjacency == b.adjacency
        and a.features == b.features
        and np.array_equal(a.labels, b.labels)
        and np.array_equal(a.train_nodes, b.train_nodes)
        and np.array_equal(a.val_nodes, b.val_nodes)
        and np.array_equal(a.test_nodes, b.test_nodes)
    )


class TestDatasetInvariants:
    def test_split_overlap_rejected(self):
        ds = toy_dataset()
        with pytest.raises(ValidationError, match="disjoint"):
            Dataset(
                ds.name, ds.num_nodes, ds.num_features, ds.num_classes,
                ds.adjacency, ds.features, ds.labels,
                ds.train_nodes, ds.train_nodes, ds.test_nodes,
            )

    def test_unlabeled_split_node_rejected(self):
        ds = toy_dataset()
        labels = ds.labels.copy()
        labels[ds.train_nodes[0]] = -1
        with pytest.raises(ValidationError, match="labeled"):
            Dataset(
                ds.name, ds.num_nodes, ds.num_features, ds.num_classes,
                ds.adjacency, ds.features, labels,
                ds.train_nodes, ds.val_nodes, ds.test_nodes,
            )

    def test_negative_feature_rejected(self):
        ds = toy_dataset()
        bad = SparseMatrix.from_coo(
            ds.num_nodes, ds.num_features, [0], [0], [-1.0]
        )
        with pytest.raises(ValidationError, match="nonnegative"):
            Dataset(
                ds.name, ds.num_nodes, ds.num_features, ds.num_classes,
                ds.adjacency, bad, ds.labels,
                ds.train_nodes, ds.val_nodes, ds.test_nodes,
            )

    def test_label_range_checked(self):
        ds = toy_dataset()
        labels = ds.labels.copy()
        labels[0] = ds.num_classes
        with pytest.raises(ValidationError):
            Dataset(
                ds.name, ds.num_nodes, ds.num_features, ds.num_classes,
                ds.adjacency, ds.features, labels,
                ds.train_nodes, ds.val_nodes, ds.test_nodes,
            )

    def test_normalized_features_rows_sum_to_one(self):
        ds = toy_dataset(seed=5)
        dense = ds.features_normalized().to_dense()
        sums = dense.sum(axis=1)
        nonzero = ds.features.to_dense().sum(axis=1) > 0
        assert np.allclose(sums[nonzero], 1.0, atol=1e-12)
        assert np.all(sums[~nonzero] == 0.0)


class TestGdfRoundTrip:
    def test_save_load_identity(self, tmp_path):
        ds = generate_sbm(2, 30, 0.2, 0.02, feature_dim=8, noise_scale=1.0, seed=3)
        path = tmp_path / "d.gdf.json"
        save_dataset(ds, path)
        assert dataset_equal(load_dataset(path), ds)

    def test_asymmetric_edge_symmetrized(self, tmp_path):
        ds = toy_dataset()
        path = tmp_path / "d.gdf.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["edges"] = [[j, i] for i, j in doc["edges"]]  # flip orientation
        path.write_text(json.dumps(doc))
        loaded = load_dataset(path)
        assert loaded.adjacency == ds.adjacency

    def test_duplicate_edge_rejected(self, tmp_path):
        ds = toy_dataset()
        path = tmp_path / "d.gdf.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["edges"].append(doc["edges"][0])
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="duplicate"):
            load_dataset(path)

    def test_mirrored_edge_is_a_duplicate(self, tmp_path):
        ds = toy_dataset()
        path = tmp_path / "d.gdf.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        i, j = doc["edges"][0]
        doc["edges"].append([j, i])
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="duplicate"):
            load_dataset(path)

    def test_duplicate_feature_triple_rejected(self, tmp_path):
        ds = toy_dataset()
        path = tmp_path / "d.gdf.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["features"].append(doc["features"][0])
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError, match="duplicate"):
            load_dataset(path)

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.gdf.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="JSON"):
            load_dataset(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "bad.gdf.json"
        path.write_text(json.dumps({"name": "x"}))
        with pytest.raises(ValidationError, match="missing"):
            load_dataset(path)


class TestGenerateSbm:
    def test_disjoint_cliques(self):
        ds = generate_sbm(2, 3, p_in=1.0, p_out=0.0, feature_dim=4, seed=0)
        dense = ds.adjacency.to_dense()
        block = np.ones((3, 3)) - np.eye(3)
        assert np.array_equal(dense[:3, :3], block)
        assert np.array_equal(dense[3:, 3:], block)
        assert np.all(dense[:3, 3:] == 0)

    def test_same_seed_same_bytes(self, tmp_path):
        paths = []
        for run in range(2):
            ds = generate_sbm(2, 40, 0.1, 0.01, feature_dim=6, seed=9)
            path = tmp_path / f"run{run}.json"
            save_dataset(ds, path)
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_expected_edge_count(self):
        # within 3 sigma of 2*C(100,2)*0.05 + 100*100*0.005 = 545
        ds = generate_sbm(2, 100, 0.05, 0.005, feature_dim=4, seed=0)
        observed = ds.adjacency.nnz // 2
        expected = 2 * (100 * 99 / 2) * 0.05 + 100 * 100 * 0.005
        sigma = np.sqrt(
            2 * (100 * 99 / 2) * 0.05 * 0.95 + 100 * 100 * 0.005 * 0.995
        )
        assert abs(observed - expected) < 3 * sigma

    def test_split_policy(self):
        ds = generate_sbm(2, 100, 0.05, 0.005, feature_dim=4, seed=1)
        assert len(ds.train_nodes) == 40  # 20 per class
        assert len(ds.val_nodes) == 80  # capped at half the remainder
        assert len(ds.test_nodes) == 80
        big = generate_sbm(2, 600, 0.01, 0.001, feature_dim=4, seed=1)
        assert len(big.train_nodes) == 40
        assert len(big.val_nodes) == 500
        assert len(big.test_nodes) == 1200 - 40 - 500

    def test_empty_split_rejected(self):
        with pytest.raises(ValidationError, match="split"):
            generate_sbm(2, 1, 0.5, 0.5, feature_dim=4, seed=0)

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            generate_sbm(2, 10, p_in=1.5, p_out=0.0, feature_dim=4, seed=0)
        with pytest.raises(ValidationError):
            generate_sbm(0, 10, p_in=0.5, p_out=0.1, feature_dim=4, seed=0)
