"""Composite objectives and the minimax training loop.

Each epoch plays one round of the minimax game: worst-case perturbations
are generated at the current parameters (the maximization), then the
parameters take one adaptive-moment step against the composite objective
built from those frozen perturbations (the minimization).

The composite objective is the supervised loss plus, depending on mode,

* ``beta *`` mean divergence between perturbed-node predictions and their
  sampled neighbors' constant predictions, and/or
* ``alpha *`` mean divergence between virtually-perturbed predictions and
  each node's constant target distribution.

Both regularizers average over their term counts (pairs, nodes) rather
than summing, so ``beta`` and ``alpha`` keep the same useful scale across
graph sizes.

Per-epoch metrics are measured at the parameters the epoch started with
(the same frozen parameters the perturbations were generated against);
this keeps an adversarial epoch at three forward and two backward passes.
"""

from __future__ import annotations

import csv
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .config import TrainConfig
from .data import Dataset
from .errors import TrainingDiverged
from .evaluate import accuracy
from .gcn import GcnParams, ParamNodes, bind_params, gcn_forward, init_params, predict
from .graph import NormalizedAdjacency, normalize_adjacency
from .perturb import (
    NeighborSample,
    PerturbationSet,
    graph_adv_perturbation,
    pair_divergence,
    sample_neighbors,
    virtual_adv_perturbation,
)
from .rng import train_streams

PARAM_FIELDS = ("w1", "b1", "w2", "b2")


class Perturbations(NamedTuple):
    """The perturbation sets required by a composite objective."""

    graph: PerturbationSet | None = None
    virtual: PerturbationSet | None = None


class ObjectiveParts(NamedTuple):
    """A built composite objective plus the pieces needed around it."""

    total: ad.Node
    tape: ad.Tape
    param_nodes: ParamNodes
    x_node: ad.Node
    probs: ad.Node
    sup_loss: float
    graph_reg: float
    virt_reg: float


def composite_objective(
    dataset: Dataset,
    a_hat: NormalizedAdjacency,
    params: GcnParams,
    config: TrainConfig,
    perturbations: Perturbations,
    sample: NeighborSample | None,
    *,
    x: np.ndarray | None = None,
    target_probs: np.ndarray | None = None,
    dropout_rng: np.random.Generator | None = None,
) -> ObjectiveParts:
    """Record the full training objective for the configured mode.

    ``target_probs`` overrides the constant prediction matrix used for
    neighbor and virtual targets (by default the clean forward pass of
    this very call, detached); freezing it explicitly makes the objective
    a pure function of (params, x), which the finite-difference oracles
    rely on.
    """
    if x is None:
        x = dataset.dense_features()
    graph_active = config.mode.uses_graph_term and config.beta > 0
    virtual_active = config.mode.uses_virtual_term and config.alpha > 0
    if graph_active and (perturbations.graph is None or sample is None):
        raise ValueError(f"mode {config.mode.value} needs graph perturbations and a sample")
    if virtual_active and perturbations.virtual is None:
        raise ValueError(f"mode {config.mode.value} needs virtual perturbations")

    tape = ad.Tape()
    pn = bind_params(tape, params)
    x_node = tape.leaf(x, requires_grad=True)
    probs, _ = gcn_forward(
        a_hat, x_node, pn,
        dropout_rate=config.dropout, training=True, rng=dropout_rng, tape=tape,
    )
    if target_probs is None:
        target_probs = probs.value

    total = ad.masked_cross_entropy(probs, dataset.labels, dataset.train_nodes)
    sup_loss = float(total.value)
    if config.weight_decay != 0.0:
        penalty = ad.add(ad.frobenius_norm_sq(pn.w1), ad.frobenius_norm_sq(pn.w2))
        total = ad.add(total, ad.scale(penalty, config.weight_decay))

    graph_reg = 0.0
    if graph_active:
        x_g = ad.add(x_node, tape.constant(perturbations.graph.r))
        probs_g, _ = gcn_forward(
            a_hat, x_g, pn,
            dropout_rate=config.dropout, training=True, rng=dropout_rng, tape=tape,
        )
        graph_term = pair_divergence(probs_g, sample, target_probs)
        graph_reg = float(graph_term.value)
        total = ad.add(total, ad.scale(graph_term, config.beta))

    virt_reg = 0.0
    if virtual_active:
        targets = target_probs.copy()
        train = dataset.train_nodes
        if len(train):
            targets[train] = 0.0
            targets[train, dataset.labels[train]] = 1.0
        x_v = ad.add(x_node, tape.constant(perturbations.virtual.r))
        probs_v, _ = gcn_forward(
            a_hat, x_v, pn,
            dropout_rate=config.dropout, training=True, rng=dropout_rng, tape=tape,
        )
        virt_term = ad.scale(ad.sum_all(ad.kl_rows(probs_v, targets)), 1.0 / dataset.num_nodes)
        virt_reg = float(virt_term.value)
        total = ad.add(total, ad.scale(virt_term, config.alpha))

    return ObjectiveParts(total, tape, pn, x_node, probs, sup_loss, graph_reg, virt_reg)


# ----------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    """First/second moment estimates and the step counter."""

    m: GcnParams
    v: GcnParams
    t: int = 0

    @classmethod
    def init(cls, params: GcnParams) -> "AdamState":
        zeros = lambda: GcnParams(
            *(np.zeros_like(getattr(params, f)) for f in PARAM_FIELDS)
        )
        return cls(m=zeros(), v=zeros())


def adam_step(
    params: GcnParams,
    grads: GcnParams,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[GcnParams, AdamState]:
    """One bias-corrected adaptive-moment update; returns new params and state."""
    t = state.t + 1
    new_p, new_m, new_v = {}, {}, {}
    for name in PARAM_FIELDS:
        g = getattr(grads, name)
        m = beta1 * getattr(state.m, name) + (1.0 - beta1) * g
        v = beta2 * getattr(state.v, name) + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_p[name] = getattr(params, name) - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return GcnParams(**new_p), AdamState(m=GcnParams(**new_m), v=GcnParams(**new_v), t=t)


# ----------------------------------------------------------------------
# history


HISTORY_HEADER = "epoch,train_loss,sup_loss,graph_reg,virt_reg,val_acc,test_acc,seconds"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    sup_loss: float
    graph_reg: float
    virt_reg: float
    val_acc: float
    test_acc: float
    seconds: float

    def metrics(self) -> tuple:
        """Everything except wall time, which is not reproducible."""
        return (
            self.epoch, self.train_loss, self.sup_loss, self.graph_reg,
            self.virt_reg, self.val_acc, self.test_acc,
        )


@dataclass
class TrainHistory:
    """Per-epoch metric log of one training run."""

    records: list[EpochRecord]

    @property
    def num_epochs(self) -> int:
        return len(self.records)

    def best_record(self) -> EpochRecord:
        """The earliest record with the maximum validation accuracy."""
        if not self.records:
            raise ValueError("empty history")
        best = self.records[0]
        for rec in self.records[1:]:
            if rec.val_acc > best.val_acc:
                best = rec
        return best

    def metrics_rows(self) -> list[tuple]:
        return [rec.metrics() for rec in self.records]

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(HISTORY_HEADER + "\n")
            writer = csv.writer(fh)
            for rec in self.records:
                writer.writerow([
                    rec.epoch, repr(rec.train_loss), repr(rec.sup_loss),
                    repr(rec.graph_reg), repr(rec.virt_reg),
                    repr(rec.val_acc), repr(rec.test_acc), repr(rec.seconds),
                ])

    @classmethod
    def from_csv(cls, path) -> "TrainHistory":
        records = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if ",".join(header) != HISTORY_HEADER:
                raise ValueError(f"unexpected history header: {header}")
            for row in reader:
                records.append(EpochRecord(
                    epoch=int(row[0]),
                    **{f: float(v) for f, v in zip(HISTORY_HEADER.split(",")[1:], row[1:])},
                ))
        return cls(records)


# ----------------------------------------------------------------------
# training loop


def train(dataset: Dataset, config: TrainConfig) -> tuple[GcnParams, TrainHistory]:
    """Run one full training and return the best-validation parameters.

    Stops after ``max_epochs`` epochs, or earlier once validation accuracy
    has not improved for ``patience`` consecutive epochs.  Raises
    :class:`TrainingDiverged` (carrying the history so far) if the loss
    becomes non-finite.
    """
    streams = train_streams(config.seed)
    a_hat = normalize_adjacency(dataset.adjacency)
    x = dataset.dense_features()
    params = init_params(dataset.num_features, config.hidden, dataset.num_classes, streams.init)
    state = AdamState.init(params)

    graph_active = config.mode.uses_graph_term and config.beta > 0
    virtual_active = config.mode.uses_virtual_term and config.alpha > 0

    records: list[EpochRecord] = []
    best_val = -np.inf
    best_params = params.copy()
    epochs_since_best = 0

    for epoch in range(1, config.max_epochs + 1):
        tic = time.perf_counter()

        sample = None
        pert_g = None
        pert_v = None
        if graph_active:
            sample = sample_neighbors(dataset, config.k, config.strategy, streams.sampling)
            pert_g = graph_adv_perturbation(a_hat, x, params, sample, config.epsilon)
        if virtual_active:
            pert_v = virtual_adv_perturbation(
                a_hat, x, params, dataset.labels, dataset.train_nodes,
                config.v_epsilon, config.xi, streams.virtual,
            )

        parts = composite_objective(
            dataset, a_hat, params, config,
            Perturbations(graph=pert_g, virtual=pert_v), sample,
            x=x, dropout_rng=streams.dropout,
        )
        train_loss = float(parts.total.value)
        if not np.isfinite(train_loss):
            raise TrainingDiverged(
                f"non-finite loss at epoch {epoch}", history=TrainHistory(records)
            )

        # metrics at the epoch's frozen parameters; the clean forward above
        # is already dropout-free whenever dropout is 0
        if config.dropout > 0:
            probs_eval = predict(a_hat, x, params)
        else:
            probs_eval = parts.probs.value
        val_acc = accuracy(probs_eval, dataset.labels, dataset.val_nodes)
        test_acc = accuracy(probs_eval, dataset.labels, dataset.test_nodes)

        if val_acc > best_val:
            best_val = val_acc
            best_params = params.copy()
            epochs_since_best = 0
        else:
            epochs_since_best += 1

        grads = parts.tape.backward(parts.total, list(parts.param_nodes))
        params, state = adam_step(params, GcnParams(*grads), state, config.lr)

        records.append(EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            sup_loss=parts.sup_loss,
            graph_reg=parts.graph_reg,
            virt_reg=parts.virt_reg,
            val_acc=val_acc,
            test_acc=test_acc,
            seconds=time.perf_counter() - tic,
        ))
        if epochs_since_best >= config.patience:
            break

    return best_params, TrainHistory(records)


# ----------------------------------------------------------------------
# grid sweeps


@dataclass
class SweepResult:
    overrides: dict
    config: TrainConfig
    val_acc: float
    test_acc: float


def _run_point(args) -> tuple[float, float]:
    dataset, config = args
    _, history = train(dataset, config)
    best = history.best_record()
    return best.val_acc, best.test_acc


def sweep(
    dataset: Dataset,
    base_config: TrainConfig,
    grid: dict[str, list],
    csv_path=None,
    jobs: int = 1,
) -> list[SweepResult]:
    """Train once per grid point and rank the results by validation accuracy.

    ``grid`` maps config field names to candidate values; the sweep runs
    the cartesian product.  Grid points are independent runs and may be
    evaluated in parallel with ``jobs > 1``.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be non-empty")
    names = list(grid)
    combos = [dict(zip(names, values)) for values in itertools.product(*grid.values())]
    configs = [base_config.replace(**combo) for combo in combos]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_point, [(dataset, c) for c in configs]))
    else:
        outcomes = [_run_point((dataset, c)) for c in configs]

    results = [
        SweepResult(overrides=combo, config=config, val_acc=val, test_acc=test)
        for combo, config, (val, test) in zip(combos, configs, outcomes)
    ]
    results.sort(key=lambda r: r.val_acc, reverse=True)

    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names + ["val_acc", "test_acc"])
            for res in results:
                writer.writerow(
                    [res.overrides[n] for n in names]
                    + [repr(res.val_acc), repr(res.test_acc)]
                )
    return results
