"""Accuracy, degree-group breakdowns, neighbor divergence, and attacks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import PROB_EPS
from .config import Strategy
from .data import Dataset
from .gcn import GcnParams, predict
from .graph import NormalizedAdjacency, node_degrees
from .perturb import graph_adv_perturbation, sample_neighbors
from .sparse import SparseMatrix

DEGREE_GROUPS = (("[1,2]", 1, 2), ("[3,5]", 3, 5), ("[6,inf)", 6, None))


def accuracy(probs: np.ndarray, labels, node_set) -> float:
    """Fraction of nodes whose argmax prediction matches the label.

    Argmax ties resolve to the lowest class index.
    """
    node_set = np.asarray(node_set, dtype=np.int64)
    if len(node_set) == 0:
        raise ValueError("cannot compute accuracy over an empty node set")
    labels = np.asarray(labels, dtype=np.int64)
    predicted = np.argmax(probs[node_set], axis=1)
    return float(np.mean(predicted == labels[node_set]))


def degree_group_accuracy(probs, labels, degrees, node_set) -> dict:
    """Accuracy within degree bands [1,2], [3,5], [6,inf).

    Returns ``{band: {"count": n, "accuracy": a}}`` with ``accuracy`` None
    for empty bands.  Degree-0 nodes are reported under ``"degree0"`` and
    excluded from the three bands.
    """
    node_set = np.asarray(node_set, dtype=np.int64)
    degrees = np.asarray(degrees)
    out = {}
    for name, lo, hi in DEGREE_GROUPS:
        d = degrees[node_set]
        mask = d >= lo if hi is None else (d >= lo) & (d <= hi)
        members = node_set[mask]
        out[name] = {
            "count": int(len(members)),
            "accuracy": accuracy(probs, labels, members) if len(members) else None,
        }
    isolated = node_set[degrees[node_set] == 0]
    out["degree0"] = {
        "count": int(len(isolated)),
        "accuracy": accuracy(probs, labels, isolated) if len(isolated) else None,
    }
    return out


def neighbor_kl(probs: np.ndarray, adjacency: SparseMatrix, node_set) -> float:
    """Mean divergence KL(p_i || p_j) over ordered connected pairs.

    Every pair with ``i`` in ``node_set`` and ``j`` a neighbor of ``i``
    contributes once; probabilities are clamped to [PROB_EPS, 1] inside
    the logs.
    """
    node_set = np.asarray(node_set, dtype=np.int64)
    heads, tails = [], []
    for i in node_set:
        nbrs, _ = adjacency.row(int(i))
        heads.extend([int(i)] * len(nbrs))
        tails.extend(int(j) for j in nbrs)
    if not heads:
        raise ValueError("node set has no incident edges")
    p = probs[np.asarray(heads)]
    q = probs[np.asarray(tails)]
    log_ratio = np.log(np.clip(p, PROB_EPS, 1.0)) - np.log(np.clip(q, PROB_EPS, 1.0))
    return float(np.mean((p * log_ratio).sum(axis=1)))


@dataclass
class RobustnessReport:
    """Test accuracy before and after a feature attack of a given scale."""

    attack_epsilon: float
    clean_accuracy: float
    attacked_accuracy: float

    @property
    def relative_decrease(self) -> float:
        return (self.attacked_accuracy - self.clean_accuracy) / self.clean_accuracy


def attack_eval(
    dataset: Dataset,
    a_hat: NormalizedAdjacency,
    params: GcnParams,
    attack_epsilon: float,
    k: int = 1,
    strategy: Strategy = Strategy.UNIFORM,
    rng: np.random.Generator | None = None,
) -> RobustnessReport:
    """Attack a frozen model with graph adversarial perturbations.

    Perturbations are generated against the given parameters at scale
    ``attack_epsilon`` and added to the (normalized) input features; test
    accuracy is compared against the clean run.  ``attack_epsilon=0``
    means no attack.
    """
    if attack_epsilon < 0:
        raise ValueError("attack_epsilon must be nonnegative")
    x = dataset.dense_features()
    clean = accuracy(predict(a_hat, x, params), dataset.labels, dataset.test_nodes)
    if attack_epsilon == 0:
        return RobustnessReport(0.0, clean, clean)
    sample = sample_neighbors(dataset, k, strategy, rng)
    pert = graph_adv_perturbation(a_hat, x, params, sample, attack_epsilon)
    attacked = accuracy(predict(a_hat, x + pert.r, params), dataset.labels, dataset.test_nodes)
    return RobustnessReport(attack_epsilon, clean, attacked)


@dataclass
class EvalReport:
    """Full evaluation of one trained model on its dataset."""

    dataset_name: str
    test_accuracy: float
    val_accuracy: float | None
    degree_groups: dict
    neighbor_kl_test: float | None
    neighbor_kl_all: float | None
    robustness: RobustnessReport | None = None

    def to_dict(self) -> dict:
        doc = {
            "dataset_name": self.dataset_name,
            "test_accuracy": self.test_accuracy,
            "val_accuracy": self.val_accuracy,
            "degree_groups": self.degree_groups,
            "neighbor_kl_test": self.neighbor_kl_test,
            "neighbor_kl_all": self.neighbor_kl_all,
            "robustness": None,
        }
        if self.robustness is not None:
            doc["robustness"] = {
                "attack_epsilon": self.robustness.attack_epsilon,
                "clean_accuracy": self.robustness.clean_accuracy,
                "attacked_accuracy": self.robustness.attacked_accuracy,
                "relative_decrease": self.robustness.relative_decrease,
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        rob = doc.get("robustness")
        return cls(
            dataset_name=doc["dataset_name"],
            test_accuracy=doc["test_accuracy"],
            val_accuracy=doc.get("val_accuracy"),
            degree_groups=doc["degree_groups"],
            neighbor_kl_test=doc.get("neighbor_kl_test"),
            neighbor_kl_all=doc.get("neighbor_kl_all"),
            robustness=None if rob is None else RobustnessReport(
                rob["attack_epsilon"], rob["clean_accuracy"], rob["attacked_accuracy"]
            ),
        )

    CSV_HEADER = (
        "dataset,test_acc,val_acc,acc_deg_1_2,acc_deg_3_5,acc_deg_6_inf,"
        "kl_test,kl_all,attack_eps,clean_acc,attacked_acc,rel_decrease"
    )

    def csv_row(self) -> str:
        def fmt(value):
            return "" if value is None else repr(float(value))

        groups = self.degree_groups
        rob = self.robustness
        cells = [
            self.dataset_name,
            fmt(self.test_accuracy),
            fmt(self.val_accuracy),
            fmt(groups["[1,2]"]["accuracy"]),
            fmt(groups["[3,5]"]["accuracy"]),
            fmt(groups["[6,inf)"]["accuracy"]),
            fmt(self.neighbor_kl_test),
            fmt(self.neighbor_kl_all),
            fmt(None if rob is None else rob.attack_epsilon),
            fmt(None if rob is None else rob.clean_accuracy),
            fmt(None if rob is None else rob.attacked_accuracy),
            fmt(None if rob is None else rob.relative_decrease),
        ]
        return ",".join(cells)


def evaluate_model(dataset: Dataset, a_hat: NormalizedAdjacency, params: GcnParams) -> EvalReport:
    """Evaluate a frozen model: accuracies, degree groups, neighbor divergence."""
    probs = predict(a_hat, dataset.dense_features(), params)
    degrees = node_degrees(dataset.adjacency)

    def kl_or_none(node_set):
        try:
            return neighbor_kl(probs, dataset.adjacency, node_set)
        except ValueError:
            return None

    return EvalReport(
        dataset_name=dataset.name,
        test_accuracy=accuracy(probs, dataset.labels, dataset.test_nodes),
        val_accuracy=(
            accuracy(probs, dataset.labels, dataset.val_nodes)
            if len(dataset.val_nodes) else None
        ),
        degree_groups=degree_group_accuracy(probs, dataset.labels, degrees, dataset.test_nodes),
        neighbor_kl_test=kl_or_none(dataset.test_nodes),
        neighbor_kl_all=kl_or_none(np.arange(dataset.num_nodes)),
    )
