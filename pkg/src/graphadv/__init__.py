"""Adversarial training for graph convolutional networks.

A small numpy/scipy engine for semi-supervised node classification that
trains a two-layer GCN four ways: standard supervised training, virtual
adversarial training, graph adversarial training (perturbations that
attack prediction smoothness across edges), and their combination.
"""

from .config import Mode, SEARCH_GRIDS, Strategy, TrainConfig
from .data import Dataset, generate_sbm, load_dataset, save_dataset, symmetrize_edges
from .errors import NonConvergenceError, TrainingDiverged, ValidationError
from .evaluate import (
    EvalReport,
    RobustnessReport,
    accuracy,
    attack_eval,
    degree_group_accuracy,
    evaluate_model,
    neighbor_kl,
)
from .gcn import (
    GcnParams,
    gcn_forward,
    gcn_objective,
    glorot_init,
    init_params,
    load_checkpoint,
    predict,
    save_checkpoint,
)
from .graph import NormalizedAdjacency, node_degrees, normalize_adjacency, pagerank
from .perturb import (
    NeighborSample,
    PerturbationSet,
    PerturbKind,
    graph_adv_perturbation,
    sample_neighbors,
    virtual_adv_perturbation,
)
from .sparse import SparseMatrix
from .train import (
    AdamState,
    EpochRecord,
    Perturbations,
    SweepResult,
    TrainHistory,
    adam_step,
    composite_objective,
    sweep,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "Dataset",
    "EpochRecord",
    "EvalReport",
    "GcnParams",
    "Mode",
    "NeighborSample",
    "NonConvergenceError",
    "NormalizedAdjacency",
    "PerturbKind",
    "PerturbationSet",
    "Perturbations",
    "RobustnessReport",
    "SEARCH_GRIDS",
    "SparseMatrix",
    "Strategy",
    "SweepResult",
    "TrainConfig",
    "TrainHistory",
    "TrainingDiverged",
    "ValidationError",
    "accuracy",
    "adam_step",
    "attack_eval",
    "composite_objective",
    "degree_group_accuracy",
    "evaluate_model",
    "gcn_forward",
    "gcn_objective",
    "generate_sbm",
    "glorot_init",
    "graph_adv_perturbation",
    "init_params",
    "load_checkpoint",
    "load_dataset",
    "neighbor_kl",
    "node_degrees",
    "normalize_adjacency",
    "pagerank",
    "predict",
    "sample_neighbors",
    "save_checkpoint",
    "save_dataset",
    "sweep",
    "symmetrize_edges",
    "train",
    "virtual_adv_perturbation",
]
