import numpy as np
import pytest

from graphadv import Dataset, SparseMatrix, generate_sbm


def adjacency_from_edges(n, edges):
    """Symmetric binary adjacency from undirected (i, j) pairs."""
    if not edges:
        return SparseMatrix.from_coo(n, n, [], [], [])
    rows, cols = [], []
    for i, j in edges:
        rows += [i, j]
        cols += [j, i]
    return SparseMatrix.from_coo(n, n, rows, cols, np.ones(len(rows)))


def toy_dataset(n=6, f=5, l=3, edge_prob=0.5, seed=0, train=2, val=1, test=1):
    """A small random dataset for objective/gradient tests."""
    rng = np.random.default_rng(seed)
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob
    ]
    adjacency = adjacency_from_edges(n, edges)
    features = SparseMatrix.from_dense(rng.random((n, f)))
    labels = rng.integers(0, l, size=n).astype(np.int64)
    ids = rng.permutation(n)
    return Dataset(
        name="toy",
        num_nodes=n,
        num_features=f,
        num_classes=l,
        adjacency=adjacency,
        features=features,
        labels=labels,
        train_nodes=np.sort(ids[:train]),
        val_nodes=np.sort(ids[train : train + val]),
        test_nodes=np.sort(ids[train + val : train + val + test]),
    )


@pytest.fixture(scope="session")
def sbm_small():
    """The canonical 2x100 community graph used across training tests."""
    return generate_sbm(2, 100, 0.05, 0.005, feature_dim=16, noise_scale=4.0, seed=0)
