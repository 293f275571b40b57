"""Stochastic configuration networks with matrix inputs, randomized baselines,
generalization-bound diagnostics and random-weight sparsity statistics."""

__version__ = "0.1.0"

from .configurator import BuildReport, TrainConfig, configure_node, train_scn, xi_scores  # noqa: E402
from .model import Network, OneDNode, TwoDNode, predict, hidden_matrix  # noqa: E402
from .rvfl import train_rvfl  # noqa: E402

__all__ = [
    "BuildReport",
    "Network",
    "OneDNode",
    "TrainConfig",
    "TwoDNode",
    "configure_node",
    "hidden_matrix",
    "predict",
    "train_rvfl",
    "train_scn",
    "xi_scores",
]
