"""Closed-form crossing observables for simple chordal SLE, with the
Monte Carlo machinery (Loewner traces, half-plane excursions, critical
Ising sampling) used to verify them."""

__version__ = "0.1.0"

from .specfun import NonConvergenceError, gamma, hyp2f1, elliptic_k, integrate
from .observables import (
    ConfigType,
    SleParams,
    params_from_kappa,
    pairing_probability,
    excursion_avoid_prob,
    rect_cross_ratio,
)
from .harness import MCResult, wilson_ci, derive_seed

__all__ = [
    "__version__",
    "NonConvergenceError",
    "gamma",
    "hyp2f1",
    "elliptic_k",
    "integrate",
    "ConfigType",
    "SleParams",
    "params_from_kappa",
    "pairing_probability",
    "excursion_avoid_prob",
    "rect_cross_ratio",
    "MCResult",
    "wilson_ci",
    "derive_seed",
]
