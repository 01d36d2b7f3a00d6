"""Randomness policy.

Every random decision in the package flows from a single integer seed
through numpy's PCG64 bit generator (a documented, versioned 64-bit
generator with a stable cross-platform stream).  A training run splits its
seed into independent named streams so that enabling or disabling one
consumer (say, neighbor sampling) never shifts the draws seen by another
(say, weight initialization).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def generator(seed: int) -> np.random.Generator:
    """Return the canonical generator for a seed."""
    return np.random.Generator(np.random.PCG64(seed))


class TrainStreams(NamedTuple):
    """Independent per-purpose generators used by one training run.

    init      weight initialization
    dropout   dropout masks (standard mode)
    sampling  neighbor sampling for graph perturbations
    virtual   random directions for virtual perturbations
    """

    init: np.random.Generator
    dropout: np.random.Generator
    sampling: np.random.Generator
    virtual: np.random.Generator


def train_streams(seed: int) -> TrainStreams:
    """Split a seed into the fixed set of training streams."""
    children = np.random.SeedSequence(seed).spawn(4)
    return TrainStreams(*(np.random.Generator(np.random.PCG64(c)) for c in children))
