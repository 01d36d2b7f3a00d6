"""Training configuration: modes, sampling strategies, hyperparameters."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass


class Mode(str, enum.Enum):
    """The four training modes."""

    STANDARD = "gcn"
    VAT = "vat"
    GRAPHAT = "graphat"
    GRAPHVAT = "graphvat"

    @property
    def uses_graph_term(self) -> bool:
        return self in (Mode.GRAPHAT, Mode.GRAPHVAT)

    @property
    def uses_virtual_term(self) -> bool:
        return self in (Mode.VAT, Mode.GRAPHVAT)


class Strategy(str, enum.Enum):
    """Neighbor sampling strategies for graph adversarial perturbations."""

    UNIFORM = "uniform"
    DEGREE = "degree"
    DEGREE_REVERSE = "degree-reverse"
    PAGERANK = "pagerank"


# published hyperparameter search ranges for the adversarial terms
SEARCH_GRIDS = {
    "epsilon": [0.01, 0.05, 0.1, 0.5, 1.0],
    "beta": [0.01, 0.05, 0.1, 0.5, 1.0, 5.0],
    "k": [1, 2, 3],
    "v_epsilon": [0.01, 0.05, 0.1, 0.5, 1.0],
    "alpha": [0.001, 0.005, 0.01, 0.05, 0.1, 0.5],
    "xi": [1e-6, 1e-5, 1e-4],
}


@dataclass
class TrainConfig:
    """Full hyperparameter record for one training run.

    ``dropout=None`` resolves to the mode default: 0.5 for standard
    training, 0 for all adversarial modes.  The regularizer weights
    ``beta`` and ``alpha`` multiply means over sampled pairs and nodes
    respectively (not sums), so their useful scales do not depend on graph
    size.
    """

    mode: Mode = Mode.STANDARD
    hidden: int = 16
    weight_decay: float = 5e-4
    dropout: float | None = None
    lr: float = 0.01
    max_epochs: int = 300
    patience: int = 30
    # graph adversarial term
    epsilon: float = 0.01
    beta: float = 0.1
    k: int = 1
    strategy: Strategy = Strategy.UNIFORM
    # virtual adversarial term
    v_epsilon: float = 0.05
    alpha: float = 0.01
    xi: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        self.mode = Mode(self.mode)
        self.strategy = Strategy(self.strategy)
        if self.dropout is None:
            self.dropout = 0.5 if self.mode is Mode.STANDARD else 0.0
        self.validate()

    def validate(self):
        if self.hidden < 1:
            raise ValueError("hidden size must be positive")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be positive")
        if self.mode.uses_graph_term:
            if self.beta < 0:
                raise ValueError("beta must be nonnegative")
            if self.beta > 0 and self.epsilon <= 0:
                raise ValueError("epsilon must be positive when the graph term is active")
            if self.beta > 0 and self.k < 1:
                raise ValueError("k must be at least 1")
        if self.mode.uses_virtual_term:
            if self.alpha < 0:
                raise ValueError("alpha must be nonnegative")
            if self.alpha > 0 and (self.v_epsilon <= 0 or self.xi <= 0):
                raise ValueError(
                    "v_epsilon and xi must be positive when the virtual term is active"
                )

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["mode"] = self.mode.value
        doc["strategy"] = self.strategy.value
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    def replace(self, **changes) -> "TrainConfig":
        doc = self.to_dict()
        doc.update(changes)
        return TrainConfig.from_dict(doc)
