"""Neighbor sampling and adversarial perturbations of node features.

Two perturbation families are produced, both as dense per-node rows of a
fixed L2 norm:

* graph perturbations push a node's prediction away from the predictions
  of its sampled neighbors (the worst case for prediction smoothness over
  edges), via one linear-approximation step: the gradient of the summed
  neighbor divergences with respect to the input features, row-normalized;
* virtual perturbations push a node's prediction away from its own target
  distribution (its label if it has one, else its current prediction),
  estimated with a single power-iteration step from a random direction,
  because at the clean input the first-order gradient vanishes.

The adjacency is never perturbed; only feature rows move.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .config import Strategy
from .data import Dataset
from .gcn import GcnParams, gcn_forward
from .graph import NormalizedAdjacency, node_degrees, pagerank
from .sparse import SparseMatrix


class PerturbKind(enum.Enum):
    GRAPH = "graph"
    VIRTUAL = "virtual"


@dataclass(frozen=True)
class PerturbationSet:
    """Per-node perturbation rows; every nonzero row has L2 norm epsilon."""

    r: np.ndarray
    epsilon: float
    kind: PerturbKind

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.r, axis=1)


@dataclass(frozen=True)
class NeighborSample:
    """Sampled (target, neighbor) pairs, at most k per target node."""

    targets: np.ndarray
    neighbors: np.ndarray
    strategy: Strategy
    k: int

    def __len__(self) -> int:
        return len(self.targets)

    def selection_matrices(self, n: int) -> tuple[SparseMatrix, SparseMatrix]:
        """Row-gather operators: (pairs x n) pickers of targets and neighbors."""
        m = len(self.targets)
        rows = np.arange(m, dtype=np.int64)
        ones = np.ones(m)
        pick_i = SparseMatrix.from_coo(m, n, rows, self.targets, ones)
        pick_j = SparseMatrix.from_coo(m, n, rows, self.neighbors, ones)
        return pick_i, pick_j


def sample_neighbors(
    dataset: Dataset,
    k: int,
    strategy: Strategy = Strategy.UNIFORM,
    rng: np.random.Generator | None = None,
) -> NeighborSample:
    """Draw up to k neighbors per node, without replacement.

    Nodes with at most k neighbors contribute all of them.  Selection
    weights follow the strategy (uniform, proportional to neighbor degree,
    proportional to reciprocal degree, or proportional to PageRank score),
    renormalized over each node's neighborhood.  Isolated nodes contribute
    no pairs.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    strategy = Strategy(strategy)
    if rng is None:
        rng = np.random.default_rng()
    adj = dataset.adjacency

    if strategy is Strategy.UNIFORM:
        scores = np.ones(dataset.num_nodes)
    elif strategy is Strategy.DEGREE:
        scores = node_degrees(adj).astype(np.float64)
    elif strategy is Strategy.DEGREE_REVERSE:
        deg = node_degrees(adj).astype(np.float64)
        scores = np.where(deg > 0, 1.0 / np.where(deg > 0, deg, 1.0), 0.0)
    else:
        scores = pagerank(adj)

    targets, chosen = [], []
    for i in range(dataset.num_nodes):
        nbrs, _ = adj.row(i)
        if len(nbrs) == 0:
            continue
        if len(nbrs) <= k:
            picked = nbrs
        else:
            weights = scores[nbrs]
            weights = weights / weights.sum()
            picked = rng.choice(nbrs, size=k, replace=False, p=weights)
        targets.extend([i] * len(picked))
        chosen.extend(int(j) for j in picked)
    return NeighborSample(
        targets=np.asarray(targets, dtype=np.int64),
        neighbors=np.asarray(chosen, dtype=np.int64),
        strategy=strategy,
        k=k,
    )


def pair_divergence(probs: ad.Node, sample: NeighborSample, target_probs: np.ndarray) -> ad.Node:
    """Mean divergence of constant neighbor predictions from target-node predictions.

    ``probs`` carries the gradient; neighbor rows are gathered from the
    constant ``target_probs``.
    """
    if len(sample) == 0:
        raise ValueError("neighbor sample is empty")
    pick_i, pick_j = sample.selection_matrices(probs.value.shape[0])
    predicted = ad.spmm(pick_i, probs)
    reference = pick_j.matmul_dense(target_probs)
    return ad.scale(ad.sum_all(ad.kl_rows(predicted, reference)), 1.0 / len(sample))


def _normalize_rows(g: np.ndarray, epsilon: float) -> np.ndarray:
    """Scale every nonzero row of g to L2 norm epsilon; zero rows stay zero."""
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return np.where(norms > 0, epsilon * g / np.where(norms > 0, norms, 1.0), 0.0)


def graph_adv_perturbation(
    a_hat: NormalizedAdjacency,
    x: np.ndarray,
    params: GcnParams,
    sample: NeighborSample,
    epsilon: float,
) -> PerturbationSet:
    """Worst-case feature perturbations against neighbor smoothness.

    One forward and one backward pass: the gradient of the summed
    divergences between each sampled target's prediction and its
    neighbors' (constant) predictions, taken with respect to the full
    feature matrix and row-normalized to length epsilon.  Rows with zero
    gradient (for instance when all predictions coincide) stay zero.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(x, dtype=np.float64)
    if len(sample) == 0:
        return PerturbationSet(np.zeros_like(x), epsilon, PerturbKind.GRAPH)
    tape = ad.Tape()
    x_node = tape.leaf(x, requires_grad=True)
    probs, _ = gcn_forward(a_hat, x_node, params, tape=tape)
    objective = pair_divergence(probs, sample, probs.value)
    (grad,) = tape.backward(objective, [x_node])
    return PerturbationSet(_normalize_rows(grad, epsilon), epsilon, PerturbKind.GRAPH)


def virtual_adv_perturbation(
    a_hat: NormalizedAdjacency,
    x: np.ndarray,
    params: GcnParams,
    labels,
    train_nodes,
    v_epsilon: float,
    xi: float,
    rng: np.random.Generator,
) -> PerturbationSet:
    """Worst-case feature perturbations against each node's own target.

    Targets are one-hot labels for training nodes and the current
    (constant) predictions elsewhere.  The direction is estimated with one
    power-iteration step: the divergence gradient evaluated at a random
    unit offset of scale xi, then row-normalized to length v_epsilon.
    """
    if v_epsilon <= 0:
        raise ValueError("v_epsilon must be positive")
    if xi <= 0:
        raise ValueError("xi must be positive")
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    train_nodes = np.asarray(train_nodes, dtype=np.int64)

    clean_probs, _ = gcn_forward(a_hat, x, params)
    targets = clean_probs.value.copy()
    if len(train_nodes):
        targets[train_nodes] = 0.0
        targets[train_nodes, labels[train_nodes]] = 1.0

    direction = _normalize_rows(rng.standard_normal(x.shape), 1.0)
    tape = ad.Tape()
    x_tilde = tape.leaf(x + xi * direction, requires_grad=True)
    probs, _ = gcn_forward(a_hat, x_tilde, params, tape=tape)
    objective = ad.scale(ad.sum_all(ad.kl_rows(probs, targets)), 1.0 / x.shape[0])
    (grad,) = tape.backward(objective, [x_tilde])
    return PerturbationSet(_normalize_rows(grad, v_epsilon), v_epsilon, PerturbKind.VIRTUAL)
