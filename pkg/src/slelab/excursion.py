"""Brownian excursions between real boundary points and trace avoidance.

An excursion from x to y in the upper half plane is built as the pair
(one-dimensional Brownian motion, Bessel-3 process) - an excursion from
0 to infinity - transported by the Moebius map z -> (yz+x)/(z+1). The
Bessel part is sampled by exact transitions (modulus of a 3d Gaussian
step), so it never touches 0 and no resampling occurs in practice; the
counter is kept because the contract asks for it.

Intersection testing is exact segment-segment distance accelerated by a
uniform spatial grid over the excursion's segments. The Monte Carlo
driver reports, besides the headline estimate, hit flags on a 3x3 grid
of (capacity cutoff, tolerance) variants so truncation and tolerance
sensitivity are visible in the output.
"""

import math
from dataclasses import dataclass

import numpy as np

from .loewner import DrivingFunction, trace_from_driving
from .harness import mc_result, derive_seed

__all__ = [
    "ExcursionPath",
    "sample_excursion",
    "paths_intersect",
    "mc_avoidance",
]

# endpoint zones of the compactified clock: width 1/22 with a quarter of
# the steps each makes the end step exactly 10x finer than the middle step
_EDGE = 1.0 / 22.0

# capacity cutoffs and tolerance scalings of the diagnostic grid; the last
# entry of each is the headline cell
T_MAX_FACTORS = (5.0, 10.0, 25.0)
TOL_FACTORS = (0.5, 1.0, 2.0)

# trace capacity grid for mc_avoidance: flat steps on [0, ZONE_CAP_FRAC*y^2]
# taking ZONE_STEP_FRAC of the budget, geometric tail out to 25*y^2
ZONE_CAP_FRAC = 0.75
ZONE_STEP_FRAC = 0.75
# excursion polyline steps per trace step; hits are dominated by the trace
# discretization, so the path is kept well below the trace scale
PATH_REFINE = 16


@dataclass(frozen=True)
class ExcursionPath:
    """Sampled excursion between real endpoints x < y (first/last exact)."""

    points: np.ndarray
    x: float
    y: float
    resample_count: int = 0


def _clock_grid(n_steps):
    # three uniform pieces of the [0,1] clock; ends 10x finer than middle
    n_end = max(1, n_steps // 4)
    n_mid = n_steps - 2 * n_end
    if n_mid < 1:
        raise ValueError("n_steps too small to honor the edge refinement")
    s = np.concatenate([
        np.linspace(0.0, _EDGE, n_end + 1),
        np.linspace(_EDGE, 1.0 - _EDGE, n_mid + 1)[1:],
        np.linspace(1.0 - _EDGE, 1.0, n_end + 1)[1:],
    ])
    return s


def sample_excursion(x, y, n_steps, seed):
    """Excursion path from x to y with n_steps segments, seeded.

    The internal clock t = s/(1-s) compactifies [0, inf); the final grid
    point s=1 is the excursion endpoint itself, which the transport map
    sends to exactly y.
    """
    if not 0.0 < x < y:
        raise ValueError("need 0 < x < y, got (%g, %g)" % (x, y))
    if n_steps < 100:
        raise ValueError("n_steps must be >= 100, got %d" % n_steps)
    rng = np.random.Generator(np.random.Philox(seed))
    s = _clock_grid(n_steps)
    t = s[:-1] / (1.0 - s[:-1])
    dt = np.diff(t)
    m = len(dt)
    sig = np.sqrt(dt)
    # real part: plain Brownian increments
    b = np.concatenate(([0.0], np.cumsum(rng.standard_normal(m) * sig)))
    # imaginary part: Bessel-3 by exact modulus-of-3d-Gaussian transitions
    g = rng.standard_normal((m, 3)) * sig[:, None]
    r = np.empty(m + 1)
    r[0] = 0.0
    resamples = 0
    for k in range(m):
        rad = math.sqrt((r[k] + g[k, 0]) ** 2 + g[k, 1] ** 2 + g[k, 2] ** 2)
        while rad <= 0.0:  # unreachable in exact arithmetic; kept per contract
            resamples += 1
            e = rng.standard_normal(3) * sig[k]
            rad = math.sqrt((r[k] + e[0]) ** 2 + e[1] ** 2 + e[2] ** 2)
        r[k + 1] = rad
    z = b + 1j * r
    pts = np.empty(m + 2, dtype=complex)
    pts[:-1] = (y * z + x) / (z + 1.0)
    pts[0] = x      # z=0 exactly
    pts[-1] = y     # z=inf under the transport map
    return ExcursionPath(points=pts, x=float(x), y=float(y),
                         resample_count=resamples)


def _segment_distances(pa, pb, qa, qb):
    # exact distance for segment pairs pa->pb vs qa->qb (complex arrays):
    # 0 when the interiors cross, else the best of four point-to-segment
    # distances (covers touching and collinear overlap)
    d1 = pb - pa
    d2 = qb - qa

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    o1 = cross(d1, qa - pa)
    o2 = cross(d1, qb - pa)
    o3 = cross(d2, pa - qa)
    o4 = cross(d2, pb - qa)
    crossing = (np.sign(o1) * np.sign(o2) < 0) & (np.sign(o3) * np.sign(o4) < 0)

    def pt_seg(p, a, d):
        dd = d.real ** 2 + d.imag ** 2
        t = np.where(dd > 0.0,
                     ((p - a).real * d.real + (p - a).imag * d.imag)
                     / np.where(dd > 0.0, dd, 1.0),
                     0.0)
        t = np.clip(t, 0.0, 1.0)
        return np.abs(p - (a + t * d))

    dist = np.minimum(
        np.minimum(pt_seg(qa, pa, d1), pt_seg(qb, pa, d1)),
        np.minimum(pt_seg(pa, qa, d2), pt_seg(pb, qa, d2)))
    return np.where(crossing, 0.0, dist)


def _build_grid(pa, pb, h, pad):
    cells = {}
    ix0 = np.floor((np.minimum(pa.real, pb.real) - pad) / h).astype(np.int64)
    ix1 = np.floor((np.maximum(pa.real, pb.real) + pad) / h).astype(np.int64)
    iy0 = np.floor((np.minimum(pa.imag, pb.imag) - pad) / h).astype(np.int64)
    iy1 = np.floor((np.maximum(pa.imag, pb.imag) + pad) / h).astype(np.int64)
    for k in range(len(pa)):
        for cx in range(ix0[k], ix1[k] + 1):
            for cy in range(iy0[k], iy1[k] + 1):
                cells.setdefault((cx, cy), []).append(k)
    return cells


def _earliest_hits(trace_pts, path_pts, radii):
    """Earliest trace-segment index within each radius, or -1.

    radii must be sorted ascending; the grid is padded by the largest one
    so a single pass serves all of them. Scanning trace segments in order
    lets the loop stop once every radius has its first hit.
    """
    ta, tb = trace_pts[:-1], trace_pts[1:]
    pa, pb = path_pts[:-1], path_pts[1:]
    rmax = radii[-1]
    seg_len = np.abs(pb - pa)
    h = max(float(np.median(seg_len)) * 4.0, 2.0 * rmax)
    cells = _build_grid(pa, pb, h, rmax)
    ix0 = np.floor((np.minimum(ta.real, tb.real) - rmax) / h).astype(np.int64)
    ix1 = np.floor((np.maximum(ta.real, tb.real) + rmax) / h).astype(np.int64)
    iy0 = np.floor((np.minimum(ta.imag, tb.imag) - rmax) / h).astype(np.int64)
    iy1 = np.floor((np.maximum(ta.imag, tb.imag) + rmax) / h).astype(np.int64)
    earliest = [-1] * len(radii)
    for k in range(len(ta)):
        cand = []
        for cx in range(ix0[k], ix1[k] + 1):
            for cy in range(iy0[k], iy1[k] + 1):
                got = cells.get((cx, cy))
                if got:
                    cand.extend(got)
        if not cand:
            continue
        j = np.unique(np.asarray(cand))
        dmin = _segment_distances(
            np.full(len(j), ta[k]), np.full(len(j), tb[k]), pa[j], pb[j]).min()
        done = True
        for i, rad in enumerate(radii):
            if earliest[i] < 0 and dmin <= rad:
                earliest[i] = k
            done = done and earliest[i] >= 0
        if done:
            break
    return earliest


def paths_intersect(trace, path, tol):
    """True iff any two segments of the polylines come within tol."""
    tp = np.asarray(trace.points, dtype=complex)
    pp = np.asarray(path.points, dtype=complex)
    if len(tp) < 2 or len(pp) < 2:
        raise ValueError("both polylines need at least one segment")
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    return _earliest_hits(tp, pp, [float(tol)])[0] >= 0


def _trace_times(n_steps, t_max, t_zone, frac):
    """Capacity grid: flat steps on [0, t_zone], geometric tail to t_max.

    Hits cluster where the trace is still near the boundary segment, so
    most steps go to the small-capacity zone. The tail ratio is solved by
    bisection so the remaining steps cover exactly [t_zone, t_max].
    """
    n_in = int(frac * n_steps)
    n_out = n_steps - n_in
    dt0 = t_zone / n_in
    lo, hi = 1.0 + 1e-12, 2.0
    for _ in range(200):
        r = 0.5 * (lo + hi)
        if dt0 * r * (r ** n_out - 1.0) / (r - 1.0) < t_max - t_zone:
            lo = r
        else:
            hi = r
    tail = dt0 * r ** np.arange(1, n_out + 1)
    tail *= (t_max - t_zone) / tail.sum()
    times = np.concatenate(
        ([0.0], np.cumsum(np.concatenate((np.full(n_in, dt0), tail)))))
    times[-1] = t_max
    return times


def mc_avoidance(kappa, u, n_samples, n_steps, seed):
    """Monte Carlo avoidance probability of an SLE trace and an excursion.

    The trace runs from 0, the excursion from x=u to y=1; the trace is
    truncated at capacity 25*y^2. Trace steps follow the zoned capacity
    grid of _trace_times and the excursion polyline is refined PATH_REFINE
    times finer, which is what keeps the discretization bias of the hit
    test small. Per-sample tolerance is half the larger median segment
    length of the two discretizations. The headline estimate uses the
    full truncation and that tolerance; hit counts for the 3x3 (cutoff,
    tolerance) diagnostic grid ride along in params.
    """
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1), got %g" % u)
    if not 0.0 < kappa <= 4.0:
        raise ValueError("kappa must lie in (0, 4], got %g" % kappa)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if n_steps < 100:
        raise ValueError("n_steps must be >= 100, got %d" % n_steps)
    y = 1.0
    t_full = 25.0 * y * y
    t_cuts = [f * y * y for f in T_MAX_FACTORS]
    times = _trace_times(n_steps, t_full, ZONE_CAP_FRAC * y * y, ZONE_STEP_FRAC)
    step_sd = np.sqrt(kappa * np.diff(times))
    hits = np.zeros((len(T_MAX_FACTORS), len(TOL_FACTORS)), dtype=np.int64)
    tol_samples = []
    for i in range(n_samples):
        rng = np.random.Generator(np.random.Philox(derive_seed(seed, 2 * i)))
        vals = np.concatenate(([0.0], np.cumsum(rng.standard_normal(n_steps) * step_sd)))
        trace = trace_from_driving(DrivingFunction(times=times, values=vals))
        path = sample_excursion(u, y, PATH_REFINE * n_steps, derive_seed(seed, 2 * i + 1))
        tol = 0.5 * max(float(np.median(np.abs(np.diff(trace.points)))),
                        float(np.median(np.abs(np.diff(path.points)))))
        radii = [f * tol for f in TOL_FACTORS]
        earliest = _earliest_hits(trace.points, path.points, radii)
        tol_samples.append(tol)
        for c, rad_first in enumerate(earliest):
            if rad_first < 0:
                continue
            # segment k exists in the truncated trace iff times[k+1] <= cut
            t_end = trace.times[rad_first + 1]
            for r, cut in enumerate(t_cuts):
                if t_end <= cut:
                    hits[r, c] += 1
    successes = int(n_samples - hits[-1, 1])  # full cutoff, central tolerance
    avoid_counts = (n_samples - hits).tolist()
    return mc_result(successes, n_samples, seed, params={
        "kappa": float(kappa),
        "u": float(u),
        "n_steps": int(n_steps),
        "path_steps": int(PATH_REFINE * n_steps),
        "t_max": t_full,
        "tol_median": float(np.median(np.asarray(tol_samples))),
        "t_max_grid": tuple(t_cuts),
        "tol_factors": TOL_FACTORS,
        "avoid_counts": avoid_counts,
    })
