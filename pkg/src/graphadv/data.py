"""Attributed-graph datasets and the GDF interchange format.

A :class:`Dataset` is an immutable bundle of a binary symmetric adjacency,
sparse nonnegative node features, per-node labels (-1 for unlabeled), and
a disjoint train/validation/test split.

Datasets travel as GDF (Graph Dataset Format), a single JSON document::

    { "name": str, "num_nodes": int, "num_features": int, "num_classes": int,
      "edges": [[i, j], ...],               # one entry per undirected edge, i < j
      "features": [[node, feat, value], ...],  # sparse triples
      "labels": [int per node, -1 = unlabeled],
      "train_nodes": [int], "val_nodes": [int], "test_nodes": [int] }

Node and feature indices are 0-based; numbers are plain decimals.  Edges
are stored once and symmetrized in memory.  The loader rejects duplicate
edges or feature triples.

Feature values are stored raw.  Training consumes the row-wise L1
normalized view returned by :meth:`Dataset.features_normalized`; keeping
storage raw makes files auditable and the save/load round trip exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import generator
from .sparse import SparseMatrix


@dataclass(frozen=True)
class Dataset:
    """An immutable attributed graph with a transductive split."""

    name: str
    num_nodes: int
    num_features: int
    num_classes: int
    adjacency: SparseMatrix
    features: SparseMatrix
    labels: np.ndarray
    train_nodes: np.ndarray
    val_nodes: np.ndarray
    test_nodes: np.ndarray

    def __post_init__(self):
        for attr in ("labels", "train_nodes", "val_nodes", "test_nodes"):
            arr = np.asarray(getattr(self, attr), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        self.validate()

    def validate(self):
        n, f = self.num_nodes, self.num_features
        if self.adjacency.n_rows != n or self.adjacency.n_cols != n:
            raise ValidationError("adjacency shape does not match num_nodes")
        if not self.adjacency.is_symmetric():
            raise ValidationError("adjacency must be symmetric")
        if np.any(self.adjacency.diagonal() != 0):
            raise ValidationError("adjacency must not contain self-loops")
        if self.adjacency.nnz and not np.all(self.adjacency.values == 1.0):
            raise ValidationError("adjacency must be binary")
        if self.features.n_rows != n or self.features.n_cols != f:
            raise ValidationError("feature matrix shape does not match dataset")
        if self.features.nnz:
            if not np.all(np.isfinite(self.features.values)):
                raise ValidationError("feature values must be finite")
            if np.any(self.features.values < 0):
                raise ValidationError("feature values must be nonnegative")
        if self.labels.shape != (n,):
            raise ValidationError("labels must have one entry per node")
        if np.any(self.labels < -1) or np.any(self.labels >= self.num_classes):
            raise ValidationError("labels must lie in [-1, num_classes)")
        splits = {
            "train_nodes": self.train_nodes,
            "val_nodes": self.val_nodes,
            "test_nodes": self.test_nodes,
        }
        seen = np.zeros(n, dtype=bool)
        for split_name, nodes in splits.items():
            if len(nodes) and (nodes.min() < 0 or nodes.max() >= n):
                raise ValidationError(f"{split_name} contains an out-of-range node index")
            if len(np.unique(nodes)) != len(nodes):
                raise ValidationError(f"{split_name} contains duplicate nodes")
            if np.any(seen[nodes]):
                raise ValidationError("train/val/test sets must be pairwise disjoint")
            seen[nodes] = True
            if np.any(self.labels[nodes] < 0):
                raise ValidationError(f"every node in {split_name} must be labeled")

    def features_normalized(self) -> SparseMatrix:
        """Row-wise L1 normalized features; all-zero rows stay zero."""
        sums = np.zeros(self.num_nodes)
        row_ids = np.repeat(
            np.arange(self.num_nodes), np.diff(self.features.row_offsets)
        )
        np.add.at(sums, row_ids, self.features.values)
        scale = np.where(sums > 0, sums, 1.0)
        return SparseMatrix(
            self.num_nodes,
            self.num_features,
            self.features.row_offsets,
            self.features.col_indices,
            self.features.values / scale[row_ids],
        )

    def dense_features(self) -> np.ndarray:
        """Dense float64 copy of the normalized features (model input)."""
        return self.features_normalized().to_dense()


def symmetrize_edges(pairs) -> SparseMatrix:
    """Binary symmetric adjacency from a list of (i, j) endpoint pairs.

    Pairs may come in either orientation; each is canonicalized to
    ``i < j`` before the symmetric matrix is built.  Self-loops and
    duplicates (after canonicalization) are rejected.
    """
    if len(pairs) == 0:
        raise ValidationError("cannot infer size from an empty edge list")
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("edges must be pairs of node indices")
    return _adjacency_from_edges(arr, int(arr.max()) + 1)


def _adjacency_from_edges(edges: np.ndarray, n: int) -> SparseMatrix:
    if len(edges):
        if edges.min() < 0 or edges.max() >= n:
            raise ValidationError("edge endpoint out of range")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        if np.any(lo == hi):
            k = int(np.argmax(lo == hi))
            raise ValidationError(f"self-loop at node {lo[k]} is not allowed")
        keys = lo * n + hi
        if len(np.unique(keys)) != len(keys):
            raise ValidationError("duplicate edge (after canonicalizing to i<j)")
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
    return SparseMatrix.from_coo(n, n, rows, cols, np.ones(len(rows)))


# ----------------------------------------------------------------------
# GDF serialization


def save_dataset(dataset: Dataset, path):
    """Write a dataset as a GDF JSON document."""
    adj = dataset.adjacency
    edges = []
    for i in range(adj.n_rows):
        cols, _ = adj.row(i)
        for j in cols[cols > i]:
            edges.append([int(i), int(j)])
    feats = dataset.features
    row_ids = np.repeat(np.arange(feats.n_rows), np.diff(feats.row_offsets))
    triples = [
        [int(r), int(c), float(v)]
        for r, c, v in zip(row_ids, feats.col_indices, feats.values)
    ]
    doc = {
        "name": dataset.name,
        "num_nodes": dataset.num_nodes,
        "num_features": dataset.num_features,
        "num_classes": dataset.num_classes,
        "edges": edges,
        "features": triples,
        "labels": [int(v) for v in dataset.labels],
        "train_nodes": [int(v) for v in dataset.train_nodes],
        "val_nodes": [int(v) for v in dataset.val_nodes],
        "test_nodes": [int(v) for v in dataset.test_nodes],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_dataset(path) -> Dataset:
    """Read a GDF JSON document, validating every dataset invariant."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc

    required = (
        "name", "num_nodes", "num_features", "num_classes",
        "edges", "features", "labels",
        "train_nodes", "val_nodes", "test_nodes",
    )
    missing = [key for key in required if key not in doc]
    if missing:
        raise ValidationError(f"{path}: missing GDF fields {missing}")

    n = int(doc["num_nodes"])
    f = int(doc["num_features"])
    edges = np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2)
    adjacency = _adjacency_from_edges(edges, n)

    triples = doc["features"]
    if triples:
        t_rows = np.asarray([t[0] for t in triples], dtype=np.int64)
        t_cols = np.asarray([t[1] for t in triples], dtype=np.int64)
        t_vals = np.asarray([t[2] for t in triples], dtype=np.float64)
    else:
        t_rows = t_cols = np.zeros(0, dtype=np.int64)
        t_vals = np.zeros(0)
    try:
        features = SparseMatrix.from_coo(n, f, t_rows, t_cols, t_vals)
    except ValidationError as exc:
        raise ValidationError(f"{path}: bad feature triples ({exc})") from exc

    try:
        return Dataset(
            name=str(doc["name"]),
            num_nodes=n,
            num_features=f,
            num_classes=int(doc["num_classes"]),
            adjacency=adjacency,
            features=features,
            labels=np.asarray(doc["labels"], dtype=np.int64),
            train_nodes=np.asarray(doc["train_nodes"], dtype=np.int64),
            val_nodes=np.asarray(doc["val_nodes"], dtype=np.int64),
            test_nodes=np.asarray(doc["test_nodes"], dtype=np.int64),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


# ----------------------------------------------------------------------
# synthetic data


def generate_sbm(
    num_classes: int,
    nodes_per_class: int,
    p_in: float,
    p_out: float,
    feature_dim: int,
    noise_scale: float = 1.0,
    seed: int = 0,
    name: str = "sbm",
) -> Dataset:
    """Stochastic-block-model dataset with class-centroid features.

    Nodes are grouped into equally sized classes; each within-class pair is
    connected with probability ``p_in`` and each cross-class pair with
    ``p_out``.  Node features are a one-hot class centroid (index
    ``class % feature_dim``) plus uniform nonnegative noise of magnitude
    ``noise_scale``.

    The split takes up to 20 training nodes per class (at most a third of
    the class, at least one), then up to 500 validation nodes (at most half
    of the remainder), and the rest as test.  Parameters that leave any
    split empty raise :class:`ValidationError`.
    """
    if num_classes < 1 or nodes_per_class < 1:
        raise ValidationError("num_classes and nodes_per_class must be positive")
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValidationError("edge probabilities must lie in [0, 1]")
    if feature_dim < 1:
        raise ValidationError("feature_dim must be positive")
    if noise_scale < 0:
        raise ValidationError("noise_scale must be nonnegative")

    rng = generator(seed)
    n = num_classes * nodes_per_class
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), nodes_per_class)

    iu, ju = np.triu_indices(n, k=1)
    pair_p = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(len(pair_p)) < pair_p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    adjacency = _adjacency_from_edges(edges, n)

    centroid = np.zeros((n, feature_dim))
    centroid[np.arange(n), labels % feature_dim] = 1.0
    dense = centroid + noise_scale * rng.random((n, feature_dim))
    features = SparseMatrix.from_dense(dense)

    train, leftovers = [], []
    for c in range(num_classes):
        members = np.nonzero(labels == c)[0]
        members = rng.permutation(members)
        take = min(20, max(1, len(members) // 3))
        train.append(members[:take])
        leftovers.append(members[take:])
    train = np.sort(np.concatenate(train))
    pool = rng.permutation(np.concatenate(leftovers))
    n_val = min(500, len(pool) // 2)
    val = np.sort(pool[:n_val])
    test = np.sort(pool[n_val:])
    if len(train) == 0 or len(val) == 0 or len(test) == 0:
        raise ValidationError(
            "parameters leave an empty train/val/test split; increase nodes_per_class"
        )

    return Dataset(
        name=name,
        num_nodes=n,
        num_features=feature_dim,
        num_classes=num_classes,
        adjacency=adjacency,
        features=features,
        labels=labels,
        train_nodes=train,
        val_nodes=val,
        test_nodes=test,
    )
