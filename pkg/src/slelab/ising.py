"""Critical Ising sampling on rectangles with two-arc boundary conditions.

The boundary is split into four frozen arcs: the left and right columns
are +1 (corners included), the top and bottom rows are -1. A Swendsen-
Wang sweep opens bonds between equal neighbors with probability
1-exp(-2*beta); clusters touching a frozen site keep their sign (a
cluster is monochromatic, so the sign is unambiguous) and free clusters
are resampled. A configuration pairs Horizontally when a 4-connected
+1 path joins the left and right arcs, Vertically otherwise; taking -1
clusters 8-connected makes the two outcomes exhaustive and exclusive.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .observables import ConfigType
from .harness import mc_result, derive_seed

__all__ = [
    "BETA_CRITICAL",
    "SpinLattice",
    "PairingOutcome",
    "init_lattice",
    "sw_update",
    "classify",
    "mc_pairing_probability",
]

BETA_CRITICAL = 0.5 * math.log(1.0 + math.sqrt(2.0))


@dataclass
class SpinLattice:
    """Rectangular spin field with a frozen boundary.

    spins has shape (M, L): axis 0 runs down the height, axis 1 across
    the width. boundary holds the frozen labels on the border (0 in the
    interior); sw_update never flips a site where boundary != 0.
    """

    L: int
    M: int
    spins: np.ndarray
    boundary: np.ndarray


class PairingOutcome(enum.Enum):
    """Which pairs of boundary arcs the two interfaces join."""

    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"

    @property
    def config_type(self):
        # a +1 left-right crossing separates the two -1 arcs, which is
        # the pairing that joins the marked points across the rectangle
        if self is PairingOutcome.HORIZONTAL:
            return ConfigType.TYPE_I
        return ConfigType.TYPE_II


def _boundary_template(L, M):
    boundary = np.zeros((M, L), dtype=np.int8)
    boundary[0, :] = -1
    boundary[M - 1, :] = -1
    boundary[:, 0] = 1          # corners go to the + arcs
    boundary[:, L - 1] = 1
    return boundary


def init_lattice(L, M, seed):
    """Lattice with i.i.d. +-1 interior and the frozen four-arc boundary."""
    if L < 8 or M < 8:
        raise ValueError("lattice must be at least 8x8, got %dx%d" % (L, M))
    rng = np.random.Generator(np.random.Philox(seed))
    spins = (rng.integers(0, 2, size=(M, L), dtype=np.int8) * 2 - 1).astype(np.int8)
    boundary = _boundary_template(L, M)
    border = boundary != 0
    spins[border] = boundary[border]
    return SpinLattice(L=int(L), M=int(M), spins=spins, boundary=boundary)


def sw_update(lattice, beta, seed_stream):
    """One Swendsen-Wang cluster update in place, honoring frozen sites."""
    if beta < 0.0:
        raise ValueError("beta must be nonnegative, got %g" % beta)
    spins = lattice.spins
    M, L = spins.shape
    n = M * L
    p_open = 1.0 - math.exp(-2.0 * beta)
    flat = spins.ravel()
    idx = np.arange(n).reshape(M, L)

    # bonds between equal neighbors, opened with probability p_open
    right_eq = spins[:, :-1] == spins[:, 1:]
    down_eq = spins[:-1, :] == spins[1:, :]
    right_open = right_eq & (seed_stream.random(right_eq.shape) < p_open)
    down_open = down_eq & (seed_stream.random(down_eq.shape) < p_open)

    src = np.concatenate([idx[:, :-1][right_open], idx[:-1, :][down_open]])
    dst = np.concatenate([idx[:, 1:][right_open], idx[1:, :][down_open]])
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    n_clusters, labels = connected_components(graph, directed=False)

    # clusters are monochromatic, so any member's spin is the cluster sign
    current = np.zeros(n_clusters, dtype=np.int8)
    current[labels] = flat
    frozen_any = np.zeros(n_clusters, dtype=bool)
    frozen_any[labels[lattice.boundary.ravel() != 0]] = True
    fresh = (seed_stream.integers(0, 2, size=n_clusters, dtype=np.int8) * 2 - 1)
    cluster_sign = np.where(frozen_any, current, fresh)
    flat[:] = cluster_sign[labels]


_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int8)


def classify(lattice):
    """Horizontal iff a 4-connected +1 cluster joins the left and right arcs."""
    plus = lattice.spins == 1
    labels, _ = ndimage.label(plus, structure=_FOUR_CONN)
    left = np.unique(labels[:, 0])
    right = np.unique(labels[:, -1])
    joined = np.intersect1d(left[left > 0], right[right > 0])
    if len(joined) > 0:
        return PairingOutcome.HORIZONTAL
    return PairingOutcome.VERTICAL


def mc_pairing_probability(rho, L, n_samples, n_therm=200, n_decorr=5,
                           beta=BETA_CRITICAL, seed=0):
    """Estimate P{Horizontal} on an aspect-rho rectangle at coupling beta.

    The chain is a single Swendsen-Wang run: n_therm updates to forget
    the random start, then n_decorr updates between recorded samples.
    """
    M = int(round(rho * L))
    if L < 8 or M < 8:
        raise ValueError("need L >= 8 and round(rho*L) >= 8, got L=%d M=%d" % (L, M))
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lattice = init_lattice(L, M, derive_seed(seed, 0))
    stream = np.random.Generator(np.random.Philox(derive_seed(seed, 1)))
    for _ in range(n_therm):
        sw_update(lattice, beta, stream)
    successes = 0
    for _ in range(n_samples):
        for _ in range(n_decorr):
            sw_update(lattice, beta, stream)
        if classify(lattice) is PairingOutcome.HORIZONTAL:
            successes += 1
    return mc_result(successes, n_samples, seed, params={
        "rho": float(rho),
        "L": int(L),
        "M": int(M),
        "beta": float(beta),
        "n_therm": int(n_therm),
        "n_decorr": int(n_decorr),
    })
