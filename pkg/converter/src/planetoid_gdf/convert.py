"""One-shot conversion of the upstream benchmark distribution to GDF.

The upstream distribution serializes each dataset as eight files:

    ind.<name>.x           features of the labeled training instances (CSR)
    ind.<name>.y           their one-hot labels
    ind.<name>.tx, .ty     features/labels of the test instances
    ind.<name>.allx, .ally features/labels of all training instances
                           (labeled + unlabeled)
    ind.<name>.graph       adjacency lists, {node: [neighbors]}
    ind.<name>.test.index  test node ids, one per line, scrambled

Training instances occupy node ids ``0 .. len(allx)-1`` and test instances
the ids listed in the index file, which sit directly above them.  Row ``j``
of ``tx``/``ty`` belongs to the ``j``-th id *in file order*.  Ids inside
the test id range that are missing from the file (a handful of isolated
nodes in one dataset) are reinserted at their indices with all-zero
feature rows, no label, and membership in no split, matching the upstream
convention.

The output is a GDF JSON document: a symmetrized edge set stored once with
``i < j`` (self-loops and duplicates dropped), sparse feature triples with
full-precision values, per-node labels (-1 for unlabeled), and the
transductive split: the designated labeled training nodes, the next
``val_size`` nodes, and the test-index list.
"""

from __future__ import annotations

import json
import pickle
from pathlib import Path

import numpy as np
import scipy.sparse as sp

UPSTREAM_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")
DATASET_NAMES = ("cora", "citeseer")


class ConversionError(ValueError):
    """Raised when the upstream files are missing or inconsistent."""


def _load_pickled(path: Path):
    with open(path, "rb") as fh:
        # the distribution was pickled under Python 2
        return pickle.load(fh, encoding="latin1")


def load_upstream(input_dir, name: str) -> tuple[dict, np.ndarray]:
    """Read the eight per-dataset files, failing fast on missing ones."""
    input_dir = Path(input_dir)
    paths = {part: input_dir / f"ind.{name}.{part}" for part in UPSTREAM_PARTS}
    index_path = input_dir / f"ind.{name}.test.index"
    missing = [str(p) for p in [*paths.values(), index_path] if not p.is_file()]
    if missing:
        raise ConversionError(f"missing upstream files: {missing}")
    parts = {part: _load_pickled(path) for part, path in paths.items()}
    test_ids = np.loadtxt(index_path, dtype=np.int64, ndmin=1)
    return parts, test_ids


def _undirected_edges(graph: dict, n: int) -> list[tuple[int, int]]:
    """Canonical i<j edge list; self-loops and duplicates dropped."""
    seen = set()
    for node, neighbors in graph.items():
        node = int(node)
        if node >= n:
            raise ConversionError(f"graph mentions node {node} but only {n} exist")
        for other in neighbors:
            other = int(other)
            if other >= n:
                raise ConversionError(f"graph mentions node {other} but only {n} exist")
            if other == node:
                continue
            seen.add((min(node, other), max(node, other)))
    return sorted(seen)


def convert(input_dir, name: str, out_path, val_size: int = 500) -> dict:
    """Convert one dataset and write the GDF file; returns summary stats."""
    if name not in DATASET_NAMES:
        raise ConversionError(f"unknown dataset {name!r}; expected one of {DATASET_NAMES}")
    parts, test_ids_file = load_upstream(input_dir, name)
    x, y = parts["x"], np.asarray(parts["y"])
    tx, ty = parts["tx"], np.asarray(parts["ty"])
    allx, ally = parts["allx"], np.asarray(parts["ally"])
    graph = parts["graph"]

    n_train_instances = allx.shape[0]
    num_features = allx.shape[1]
    num_classes = y.shape[1]
    n_labeled = x.shape[0]

    if len(np.unique(test_ids_file)) != len(test_ids_file):
        raise ConversionError("test index file contains duplicate ids")
    lo, hi = int(test_ids_file.min()), int(test_ids_file.max())
    if lo != n_train_instances:
        raise ConversionError(
            f"unexpected layout: test ids start at {lo}, expected {n_train_instances}"
        )
    if tx.shape[0] != len(test_ids_file) or ty.shape[0] != len(test_ids_file):
        raise ConversionError("test feature/label rows disagree with the index file")
    num_nodes = hi + 1
    if len(graph) != num_nodes:
        raise ConversionError(
            f"graph lists {len(graph)} nodes but ids imply {num_nodes}"
        )

    # features: training instances at their ids, test rows at file order ids;
    # ids in the test range missing from the file keep all-zero rows
    features = sp.lil_matrix((num_nodes, num_features), dtype=np.float64)
    features[:n_train_instances] = allx
    features[test_ids_file] = tx
    features = features.tocsr()

    onehot = np.zeros((num_nodes, num_classes))
    onehot[:n_train_instances] = ally
    onehot[test_ids_file] = ty
    labeled = onehot.sum(axis=1) > 0
    labels = np.where(labeled, np.argmax(onehot, axis=1), -1).astype(np.int64)

    train_nodes = np.arange(n_labeled, dtype=np.int64)
    if n_labeled + val_size > n_train_instances:
        raise ConversionError(
            f"cannot take {val_size} validation nodes: only "
            f"{n_train_instances - n_labeled} unlabeled training instances exist"
        )
    val_nodes = np.arange(n_labeled, n_labeled + val_size, dtype=np.int64)
    test_nodes = np.sort(test_ids_file)

    splits = np.concatenate([train_nodes, val_nodes, test_nodes])
    if len(np.unique(splits)) != len(splits):
        raise ConversionError("train/val/test node sets overlap")
    if np.any(labels[splits] < 0):
        raise ConversionError("a split references an unlabeled node")

    edges = _undirected_edges(graph, num_nodes)

    coo = features.tocoo()
    order = np.lexsort((coo.col, coo.row))
    triples = [
        [int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order
    ]

    doc = {
        "name": name,
        "num_nodes": int(num_nodes),
        "num_features": int(num_features),
        "num_classes": int(num_classes),
        "edges": [[int(i), int(j)] for i, j in edges],
        "features": triples,
        "labels": [int(v) for v in labels],
        "train_nodes": [int(v) for v in train_nodes],
        "val_nodes": [int(v) for v in val_nodes],
        "test_nodes": [int(v) for v in test_nodes],
    }
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")

    return {
        "name": name,
        "num_nodes": int(num_nodes),
        "num_edges": len(edges),
        "num_features": int(num_features),
        "num_classes": int(num_classes),
        "train": len(train_nodes),
        "val": len(val_nodes),
        "test": len(test_nodes),
        "unlabeled_isolated": int(num_nodes - n_train_instances - len(test_ids_file)),
    }
