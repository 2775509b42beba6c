"""Random 2x2 matrix cocycles: Lyapunov exponents, stationary measures,
projective-hyperbolicity certificates and finite-time limit laws."""

from . import errors
from .core import Arc, Mat2, ProjPoint, Svd2, proj_act, proj_dist, svd2
from .hyperbolicity import certify, multicone_search, multicone_verify
from .limits import SimConfig, simulate_lognorm
from .shift import Bernoulli, Cocycle, Markov, Word, load_cocycle, save_cocycle
from .stationary import (
    furstenberg_l1,
    induced_l1,
    l1_branch_series,
    lyapunov_spectrum,
    stationary_measure,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "Bernoulli",
    "Cocycle",
    "Markov",
    "Mat2",
    "ProjPoint",
    "SimConfig",
    "Svd2",
    "Word",
    "__version__",
    "certify",
    "errors",
    "furstenberg_l1",
    "induced_l1",
    "l1_branch_series",
    "load_cocycle",
    "lyapunov_spectrum",
    "multicone_search",
    "multicone_verify",
    "proj_act",
    "proj_dist",
    "save_cocycle",
    "simulate_lognorm",
    "stationary_measure",
    "svd2",
]
