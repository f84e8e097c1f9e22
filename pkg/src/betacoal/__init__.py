"""betacoal: simulation and statistical verification for Beta(2-a, a)
coalescent tree lengths, 1 < a < 2.
"""

__version__ = "0.1.0"

from .numerics import AlphaParams, make_alpha_params
from .sampling import RandomStream
from .coalescent import simulate_path, tree_length, segregating_sites
from .stats import ExperimentReport, run_experiment

__all__ = [
    "AlphaParams",
    "make_alpha_params",
    "RandomStream",
    "simulate_path",
    "tree_length",
    "segregating_sites",
    "ExperimentReport",
    "run_experiment",
    "__version__",
]
