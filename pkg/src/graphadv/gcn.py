"""Two-layer graph convolutional network.

Each layer projects its input with a learned affine map and propagates the
result through the normalized adjacency:
``probs = softmax(Â · (relu(Â · (X·W1 + b1)) · W2 + b2))``.

Forward passes are recorded on a :class:`~graphadv.autodiff.Tape`, with
the feature matrix a differentiable leaf, so gradients are available both
for the parameters and for the inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .config import TrainConfig
from .graph import NormalizedAdjacency
from .rng import generator


@dataclass
class GcnParams:
    """The learnable parameter set {W1, b1, W2, b2}."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def copy(self) -> "GcnParams":
        return GcnParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    @property
    def num_features(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]


class ParamNodes(NamedTuple):
    """The parameters bound to a tape as differentiable leaves."""

    w1: ad.Node
    b1: ad.Node
    w2: ad.Node
    b2: ad.Node


def glorot_init(n_in: int, n_out: int, seed) -> np.ndarray:
    """Uniform init on ±sqrt(6 / (n_in + n_out)).

    ``seed`` may be an integer or an existing numpy Generator.
    """
    if n_in < 1 or n_out < 1:
        raise ValueError("glorot_init needs positive dimensions")
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    bound = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-bound, bound, size=(n_in, n_out))


def init_params(num_features: int, hidden: int, num_classes: int, seed) -> GcnParams:
    """Glorot weights, zero biases."""
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    return GcnParams(
        w1=glorot_init(num_features, hidden, rng),
        b1=np.zeros(hidden),
        w2=glorot_init(hidden, num_classes, rng),
        b2=np.zeros(num_classes),
    )


def bind_params(tape: ad.Tape, params: GcnParams) -> ParamNodes:
    return ParamNodes(
        w1=tape.leaf(params.w1, requires_grad=True),
        b1=tape.leaf(params.b1, requires_grad=True),
        w2=tape.leaf(params.w2, requires_grad=True),
        b2=tape.leaf(params.b2, requires_grad=True),
    )


def gcn_forward(
    a_hat: NormalizedAdjacency,
    x,
    params,
    *,
    dropout_rate: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
    tape: ad.Tape | None = None,
):
    """Run the network and return ``(probs, tape)``.

    ``x`` may be a dense array (bound as a differentiable leaf) or an
    already-recorded node; likewise ``params`` may be a :class:`GcnParams`
    or a :class:`ParamNodes` already bound to ``tape``.  Dropout (inverted
    scaling) is applied to both layer inputs, only when ``training`` and
    ``dropout_rate > 0``.
    """
    if tape is None:
        tape = ad.Tape()
    if isinstance(x, ad.Node):
        x_node = x
        if x_node.tape is not tape:
            raise ValueError("x node lives on a different tape")
    else:
        x_node = tape.leaf(np.asarray(x, dtype=np.float64), requires_grad=True)
    pn = params if isinstance(params, ParamNodes) else bind_params(tape, params)

    n, f = x_node.value.shape
    if a_hat.n != n:
        raise ValueError(f"adjacency is {a_hat.n}x{a_hat.n} but x has {n} rows")
    if pn.w1.value.shape[0] != f:
        raise ValueError(
            f"x has {f} features but W1 expects {pn.w1.value.shape[0]}"
        )
    if pn.w1.value.shape[1] != pn.w2.value.shape[0]:
        raise ValueError("W1/W2 hidden dimensions disagree")

    use_dropout = training and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("dropout needs an rng")

    def dropped(node):
        if not use_dropout:
            return node
        mask = (rng.random(node.value.shape) >= dropout_rate) / (1.0 - dropout_rate)
        return ad.mul(node, mask)

    h1 = ad.relu(ad.spmm(a_hat.matrix, ad.add_bias(ad.matmul(dropped(x_node), pn.w1), pn.b1)))
    logits = ad.spmm(a_hat.matrix, ad.add_bias(ad.matmul(dropped(h1), pn.w2), pn.b2))
    probs = ad.softmax_rows(logits)
    ad.pass_counts["forward"] += 1
    return probs, tape


def predict(a_hat: NormalizedAdjacency, x: np.ndarray, params: GcnParams) -> np.ndarray:
    """Deterministic class probabilities (no dropout, no gradients kept)."""
    probs, _ = gcn_forward(a_hat, x, params)
    return probs.value


def gcn_objective(
    probs: ad.Node,
    labels,
    train_nodes,
    params: ParamNodes,
    weight_decay: float,
) -> ad.Node:
    """Mean training cross-entropy plus L2 penalty on the two weight matrices.

    Biases are excluded from the penalty.
    """
    if len(np.asarray(train_nodes)) == 0:
        raise ValueError("training node set is empty")
    loss = ad.masked_cross_entropy(probs, labels, train_nodes)
    if weight_decay != 0.0:
        penalty = ad.add(ad.frobenius_norm_sq(params.w1), ad.frobenius_norm_sq(params.w2))
        loss = ad.add(loss, ad.scale(penalty, weight_decay))
    return loss


# ----------------------------------------------------------------------
# checkpoints


def save_checkpoint(params: GcnParams, config: TrainConfig, path):
    """JSON checkpoint: shapes, row-major values, and the producing config."""
    doc = {"config": config.to_dict()}
    for name in ("w1", "b1", "w2", "b2"):
        arr = getattr(params, name)
        doc[name] = {"shape": list(arr.shape), "data": arr.ravel().tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path):
    """Load a checkpoint, returning ``(params, config)``."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    arrays = {}
    for name in ("w1", "b1", "w2", "b2"):
        entry = doc[name]
        arrays[name] = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
    return GcnParams(**arrays), TrainConfig.from_dict(doc["config"])
