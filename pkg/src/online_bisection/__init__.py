"""Online database reconstruction through a binary threshold oracle.

A learner answers a stream of linear queries against a hidden vector while
only ever seeing single noisy comparison bits, shrinking a hypercube of
candidate coefficients over a known low-dimensional query subspace.
"""
from .config import ExperimentConfig, load_config
from .geometry import Basis, gram_schmidt
from .harness import run_batch, run_online, run_scaling
from .hypercube import Hypercube
from .learner import OnlineBisection
from .noise import NoiseModel
from .protocol import Database, Mechanism
from .querygen import QueryDistribution, make_subspace

__all__ = [
    "Basis", "Database", "ExperimentConfig", "Hypercube", "Mechanism", "NoiseModel",
    "OnlineBisection", "QueryDistribution", "gram_schmidt", "load_config", "make_subspace",
    "run_batch", "run_online", "run_scaling",
]
