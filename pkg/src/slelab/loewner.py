"""Chordal SLE traces in the upper half plane.

The driving function is sampled as a Gaussian walk and held piecewise
constant, so every incremental inverse map is the explicit square-root
slit map and the trace point at step k is the k-fold composition applied
to a point slightly above the tip. Cost is O(n^2) with the inner update
vectorized over trace indices. A Moebius helper transports finished
traces between half-plane configurations.
"""

from dataclasses import dataclass

import numpy as np

from .specfun import NonConvergenceError

__all__ = [
    "DrivingFunction",
    "Trace",
    "TIP_EPS",
    "sample_driving",
    "trace_from_driving",
    "mobius_map_trace",
    "write_trace_csv",
]

# relative tip offset: the trace point at step k is evaluated at
# values[k] + i*sqrt(TIP_EPS*dt), just off the branch point of the slit map
TIP_EPS = 1e-3


@dataclass(frozen=True)
class DrivingFunction:
    """Piecewise-constant driving samples: times[0]=0, values[0]=0."""

    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class Trace:
    """Discrete trace points with their capacity times.

    Traces straight from the solver start at 0; transported traces start
    wherever the map sends 0.
    """

    points: np.ndarray
    times: np.ndarray


def _check_driving(drv):
    times = np.asarray(drv.times, dtype=float)
    values = np.asarray(drv.values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
        raise ValueError("driving needs matching 1-d times/values with >= 2 entries")
    if times[0] != 0.0 or values[0] != 0.0:
        raise ValueError("driving must start at t=0 with value 0")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly increasing")
    return times, values


def sample_driving(kappa, n_steps, t_max, seed):
    """Gaussian random walk with per-step variance kappa*dt on a uniform grid."""
    if kappa < 0.0:
        raise ValueError("kappa must be nonnegative, got %g" % kappa)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1, got %d" % n_steps)
    if t_max <= 0.0:
        raise ValueError("t_max must be positive, got %g" % t_max)
    rng = np.random.Generator(np.random.Philox(seed))
    dt = t_max / n_steps
    steps = rng.standard_normal(n_steps) * np.sqrt(kappa * dt)
    values = np.concatenate(([0.0], np.cumsum(steps)))
    times = np.linspace(0.0, t_max, n_steps + 1)
    return DrivingFunction(times=times, values=values)


def _evolve(times, values, check_steps):
    # inverse slit maps applied newest-first; w[j:] holds every trace point
    # that still needs the j-th incremental map
    n = len(times) - 1
    dt = np.diff(times)
    w = np.empty(n + 1, dtype=complex)
    w[1:] = values[1:] + 1j * np.sqrt(TIP_EPS * dt)
    # overflow surfaces as non-finite entries and is checked explicitly
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n, 0, -1):
            z = w[j:] - values[j]
            s = np.sqrt(z * z - 4.0 * dt[j - 1])
            # keep the branch mapping into the upper half plane
            np.negative(s, out=s, where=s.imag < 0.0)
            w[j:] = values[j] + s
            if check_steps and not np.all(np.isfinite(w[j:])):
                raise NonConvergenceError(
                    "trace evolution produced non-finite values at step %d" % j)
    w[0] = 0.0
    return w


def trace_from_driving(drv):
    """Trace points at the driving's own times, O(n^2) total.

    Raises a numeric error naming the step at which intermediate maps
    blow up (only possible for absurdly large driving values).
    """
    times, values = _check_driving(drv)
    w = _evolve(times, values, check_steps=False)
    if not np.all(np.isfinite(w)):
        # rerun with per-step checks to report the offending map
        _evolve(times, values, check_steps=True)
        raise NonConvergenceError("trace evolution produced non-finite values")
    return Trace(points=w, times=times.copy())


def mobius_map_trace(trace, coeffs):
    """Pointwise image of a trace under z -> (az+b)/(cz+d), ad-bc > 0.

    The positive determinant keeps the upper half plane; a pole error is
    raised if any point comes within a relative 1e-12 of -d/c.
    """
    a, b, c, d = (float(v) for v in coeffs)
    if a * d - b * c <= 0.0:
        raise ValueError("map must have positive determinant ad-bc")
    pts = np.asarray(trace.points, dtype=complex)
    denom = c * pts + d
    scale = abs(c) * np.abs(pts) + abs(d)
    if np.any(np.abs(denom) <= 1e-12 * scale):
        raise ValueError("trace point maps through the pole of the Moebius map")
    return Trace(points=(a * pts + b) / denom, times=np.asarray(trace.times).copy())


def write_trace_csv(trace, path):
    """Dump a trace as CSV rows t, re, im (12 significant digits)."""
    with open(path, "w", newline="") as fh:
        fh.write("t,re,im\n")
        for t, z in zip(trace.times, trace.points):
            fh.write("%.12g,%.12g,%.12g\n" % (t, z.real, z.imag))
