"""Closed-form crossing observables for simple chordal SLE.

Parameter maps, the boundary kernel, the normalized two-path mass, pairing
partition functions and probabilities, the three published expressions for
the critical Ising pairing probability, the excursion avoidance probability,
residual checkers for the governing ODEs/PDE, and the rectangle-to-half-plane
cross ratio. Everything is a pure function; the single cached value (the
pairing-probability normalizer) is initialized under a lock.
"""

import enum
import math
import threading
from dataclasses import dataclass

from .specfun import (
    elliptic_k,
    agm_ratio,
    gamma,
    hyp2f1,
    hyp2f1_at_1,
    hyp2f1_deriv,
    integrate,
)

__all__ = [
    "SleParams",
    "ConfigType",
    "params_from_kappa",
    "kernel_h1",
    "boundary_cross_ratio",
    "two_path_mass",
    "partition_type_I",
    "partition_type_II",
    "pairing_probability",
    "ising_type2_ratio",
    "ising_type2_difference",
    "ising_type2_integral",
    "excursion_avoid_prob",
    "two_path_mass_ode_residual",
    "ising_reflected_ode_residual",
    "avoidance_ode_residual",
    "avoidance_hyp_ode_residual",
    "avoidance_pde_residual",
    "rect_cross_ratio",
]


@dataclass(frozen=True)
class SleParams:
    """Derived constants of a simple chordal SLE path."""

    kappa: float
    a: float           # 2/kappa, the hypergeometric parameter base
    b: float           # (6-kappa)/(2 kappa), boundary scaling exponent
    c_central: float   # central charge
    lam: float         # loop-measure coefficient, -c_central/2


def params_from_kappa(kappa):
    """Parameter bundle for kappa in (0, 4]."""
    if not 0.0 < kappa <= 4.0:
        raise ValueError("kappa must lie in (0, 4], got %g" % kappa)
    a = 2.0 / kappa
    b = (6.0 - kappa) / (2.0 * kappa)
    c_central = (kappa - 6.0) * (8.0 - 3.0 * kappa) / (2.0 * kappa)
    return SleParams(kappa=kappa, a=a, b=b, c_central=c_central,
                     lam=-0.5 * c_central)


class ConfigType(enum.Enum):
    """Pairing of the boundary quadruple (0, x, 1, inf) by two disjoint curves."""

    TYPE_I = "I"    # 0 <-> inf and x <-> 1
    TYPE_II = "II"  # 0 <-> x and 1 <-> inf


def kernel_h1(x, y, b):
    """Half-plane boundary kernel |y-x|^(-2b), normalized to 1 at (0, inf)."""
    if x == y:
        raise ValueError("kernel is singular at coinciding points")
    return abs(y - x) ** (-2.0 * b)


def boundary_cross_ratio(z1, w1, z2, w2):
    """Cross ratio (z1-w1)(z2-w2) / ((z1-z2)(w1-w2)) of four boundary points."""
    return (z1 - w1) * (z2 - w2) / ((z1 - z2) * (w1 - w2))


def _mass_prefactor(a):
    return gamma(2 * a) * gamma(6 * a - 1) / (gamma(4 * a) * gamma(4 * a - 1))


def two_path_mass(u, a):
    """Normalized mass of two mutually avoiding paths at endpoint ratio u.

    Equals [G(2a)G(6a-1)/(G(4a)G(4a-1))] * u^a * F(2a, 1-2a, 4a; u),
    increasing from 0 at u=0+ to 1 at u=1.
    """
    if a <= 0.25:
        raise ValueError("two_path_mass needs a > 1/4, got %g" % a)
    if not 0.0 < u <= 1.0:
        raise ValueError("u must lie in (0, 1], got %g" % u)
    if u == 1.0:
        return _mass_prefactor(a) * hyp2f1_at_1(2 * a, 1 - 2 * a, 4 * a)
    return _mass_prefactor(a) * u ** a * hyp2f1(2 * a, 1 - 2 * a, 4 * a, u)


def partition_type_I(x, a):
    """Partition function of the pairing 0<->inf, x<->1."""
    if a <= 0.25:
        raise ValueError("partition function needs a > 1/4, got %g" % a)
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1), got %g" % x)
    return (_mass_prefactor(a) * x ** a * (1.0 - x) ** a
            * hyp2f1(2 * a, 6 * a - 1, 4 * a, x))


def partition_type_II(x, a):
    """Partition function of the pairing 0<->x, 1<->inf; the mirror of type I."""
    return partition_type_I(1.0 - x, a)


def pairing_probability(x, kappa, which, formal=False):
    """Probability that the two curves through (0, x, 1, inf) pair as `which`.

    kappa is restricted to (0, 4] where the two-path measure exists; with
    formal=True the same formula is evaluated for kappa in (4, 8) as a
    formula-level quantity only (kappa=6 reproduces the percolation
    crossing formula).
    """
    hi = 8.0 if formal else 4.0
    if not 0.0 < kappa < hi and not (not formal and kappa == 4.0):
        raise ValueError("kappa=%g outside the allowed range" % kappa)
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1), got %g" % x)
    a = 2.0 / kappa
    fx = hyp2f1(2 * a, 6 * a - 1, 4 * a, x)
    f1x = hyp2f1(2 * a, 6 * a - 1, 4 * a, 1.0 - x)
    p_one = fx / (fx + f1x)
    if which == ConfigType.TYPE_I:
        return p_one
    if which == ConfigType.TYPE_II:
        return 1.0 - p_one  # exact complement
    raise ValueError("which must be a ConfigType")


# --- the three equivalent Ising pairing expressions (kappa = 3) ---

_F43 = (4.0 / 3.0, 3.0, 8.0 / 3.0)


def ising_type2_ratio(x):
    """Ising type II probability as a ratio of hypergeometric values."""
    return pairing_probability(x, 3.0, ConfigType.TYPE_II)


def ising_type2_difference(x):
    """Ising type II probability in the antisymmetric gamma-prefactor form.

    The textbook form multiplies F(4/3, 3, 8/3; x), which diverges at x=1,
    by x^(5/3)(1-x)^(5/3); here each product is rewritten through the Euler
    transform as x^(5/3) F(4/3, -1/3, 8/3; x), which is bounded on [0, 1],
    so the expression stays finite and cancellation-free at both ends.
    """
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1), got %g" % x)
    coef = 0.45 * gamma(1.0 / 3.0) / gamma(2.0 / 3.0) ** 2
    f_x = x ** (5.0 / 3.0) * hyp2f1(4.0 / 3.0, -1.0 / 3.0, 8.0 / 3.0, x)
    f_1x = (1.0 - x) ** (5.0 / 3.0) * hyp2f1(4.0 / 3.0, -1.0 / 3.0, 8.0 / 3.0, 1.0 - x)
    return 0.5 - coef * (f_x - f_1x) / (1.0 - x + x * x)


def _pairing_integrand(y):
    return y ** (2.0 / 3.0) * (1.0 - y) ** (2.0 / 3.0) / (1.0 - y + y * y) ** 2


_norm_lock = threading.Lock()
_norm_value = None


def _pairing_normalizer():
    global _norm_value
    if _norm_value is None:
        with _norm_lock:
            if _norm_value is None:
                _norm_value = integrate(_pairing_integrand, 0.0, 1.0, tol=1e-10)
    return _norm_value


def ising_type2_integral(x, tol=1e-10):
    """Ising type II probability as a normalized tail integral."""
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1), got %g" % x)
    if tol == 1e-10:
        norm = _pairing_normalizer()
    else:
        norm = integrate(_pairing_integrand, 0.0, 1.0, tol=tol)
    return integrate(_pairing_integrand, x, 1.0, tol=tol) / norm


def _avoid_prefactor(a):
    return (gamma(2 * a) * gamma(4 * a + 1)
            / (gamma(2 * a + 2) * gamma(4 * a - 1)))


def excursion_avoid_prob(u, kappa):
    """Probability that a simple SLE path avoids an independent excursion.

    The path runs from 0 to infinity, the excursion between boundary points
    x < y with u = x/y. Continuous at the ends: u=0 gives 0, u=1 gives 1.
    """
    if not 0.0 < kappa <= 4.0:
        raise ValueError("kappa must lie in (0, 4], got %g" % kappa)
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1], got %g" % u)
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    a = 2.0 / kappa
    return _avoid_prefactor(a) * u * hyp2f1(2.0, 1.0 - 2.0 * a, 2.0 * a + 2.0, u)


# --- analytic derivative bundles for the residual checkers ---

def _two_path_mass_derivs(u, a):
    pa, pb, pc = 2 * a, 1 - 2 * a, 4 * a
    c0 = _mass_prefactor(a)
    f = hyp2f1(pa, pb, pc, u)
    f1 = hyp2f1_deriv(pa, pb, pc, u)
    # second derivative via d/du of f1 = (pa pb / pc) F(pa+1, pb+1, pc+1; u)
    f2 = pa * pb / pc * hyp2f1_deriv(pa + 1, pb + 1, pc + 1, u)
    ua = u ** a
    psi = c0 * ua * f
    dpsi = c0 * (a * ua / u * f + ua * f1)
    d2psi = c0 * (a * (a - 1) * ua / (u * u) * f + 2 * a * ua / u * f1 + ua * f2)
    return psi, dpsi, d2psi


def _avoidance_derivs(u, a):
    pa, pb, pc = 2.0, 1.0 - 2.0 * a, 2.0 * a + 2.0
    d0 = _avoid_prefactor(a)
    f = hyp2f1(pa, pb, pc, u)
    f1 = hyp2f1_deriv(pa, pb, pc, u)
    f2 = pa * pb / pc * hyp2f1_deriv(pa + 1, pb + 1, pc + 1, u)
    phi = d0 * u * f
    dphi = d0 * (f + u * f1)
    d2phi = d0 * (2 * f1 + u * f2)
    return phi, dphi, d2phi


def two_path_mass_ode_residual(u, a):
    """Residual of the hypergeometric ODE governing the two-path mass."""
    psi, dpsi, d2psi = _two_path_mass_derivs(u, a)
    return (u * u * (1 - u) ** 2 * d2psi
            + 2 * u * (a - u + (1 - a) * u * u) * dpsi
            - a * (3 * a - 1) * (1 - u) ** 2 * psi)


def ising_reflected_ode_residual(z):
    """Residual of the four-point correlation ODE at the Ising point.

    The reflected mass g(z) = psi(1-z), psi the two-path mass at a = 2/3,
    must satisfy 3z(z-1)^2 g'' + 2(z-1)(z+1) g' - 2z g = 0.
    """
    psi, dpsi, d2psi = _two_path_mass_derivs(1.0 - z, 2.0 / 3.0)
    g, dg, d2g = psi, -dpsi, d2psi
    return 3 * z * (z - 1) ** 2 * d2g + 2 * (z - 1) * (z + 1) * dg - 2 * z * g


def avoidance_ode_residual(u, a):
    """Residual of the avoidance-probability ODE in the ratio variable."""
    phi, dphi, d2phi = _avoidance_derivs(u, a)
    return (u * u * (1 - u) * d2phi
            + 2 * u * (a + (a - 1) * u) * dphi
            - 2 * a * (1 - u) * phi)


def avoidance_hyp_ode_residual(u, a):
    """Residual of the standard hypergeometric ODE after substitution.

    psi(u) = u^(-1) (1-u)^(1-4a) phi(u) is built from phi by the product
    rule, then checked against u(1-u) psi'' + (2a+2-(6a+2)u) psi' -
    2a(4a+1) psi = 0, exercising the whole transformation chain.
    """
    phi, dphi, d2phi = _avoidance_derivs(u, a)
    g = u ** (-1.0) * (1.0 - u) ** (1.0 - 4.0 * a)
    ell = -1.0 / u - (1.0 - 4.0 * a) / (1.0 - u)
    dell = 1.0 / (u * u) - (1.0 - 4.0 * a) / (1.0 - u) ** 2
    psi = g * phi
    dpsi = g * (ell * phi + dphi)
    d2psi = g * ((ell * ell + dell) * phi + 2 * ell * dphi + d2phi)
    return (u * (1 - u) * d2psi
            + (2 * a + 2 - (6 * a + 2) * u) * dpsi
            - 2 * a * (4 * a + 1) * psi)


def avoidance_pde_residual(x, y, kappa):
    """Residual of the two-variable generator equation for the avoidance event.

    Phi(x, y) = phi(x/y); the partial derivatives are assembled from the
    analytic phi', phi'' by the chain rule, never by finite differences.
    """
    if not 0.0 < x < y:
        raise ValueError("need 0 < x < y")
    a = 2.0 / kappa
    u = x / y
    phi, dphi, d2phi = _avoidance_derivs(u, a)
    phi_x = dphi / y
    phi_y = -x * dphi / (y * y)
    phi_xx = d2phi / (y * y)
    phi_yy = 2 * x * dphi / y ** 3 + x * x * d2phi / y ** 4
    phi_xy = -dphi / (y * y) - x * d2phi / y ** 3
    return (-a * (1.0 / x - 1.0 / y) ** 2 * phi
            + a / x * phi_x + a / y * phi_y
            + 0.5 * phi_xx + 0.5 * phi_yy + phi_xy)


def _modulus_from_ratio(target):
    # agm_ratio is strictly decreasing in k; geometric bisection keeps
    # relative precision for roots anywhere down to the underflow floor
    lo, hi = 1e-300, 0.999999
    for _ in range(260):
        mid = math.sqrt(lo * hi)
        if agm_ratio(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return math.sqrt(lo * hi)


def rect_cross_ratio(rho):
    """Cross ratio x of a rectangle's corners mapped to (0, x, 1, inf).

    rho is the height/width aspect ratio, clamped to [0.05, 20]. The corner
    map sends top-left to 0, bottom-left to x, bottom-right to 1 and
    top-right to infinity, which gives x = ((1-k)/(1+k))^2 with the modulus
    k solving K(k')/K(k) = 2 rho. Strictly increasing with x(1) = 1/2 and
    x(rho) + x(1/rho) = 1. For flat rectangles (rho < 1/4) the modulus sits
    so close to 1 that 1-k would be lost to rounding, so the complementary
    modulus km with K(km')/K(km) = 1/(2 rho) is solved instead and x is
    rebuilt through the exact identity 1-k = km^2/(1+k). Beyond rho of
    about 12 the true 1-x falls below the spacing of doubles near 1 and
    the returned value saturates at 1.0.
    """
    if rho <= 0.0:
        raise ValueError("aspect ratio must be positive, got %g" % rho)
    rho = min(max(rho, 0.05), 20.0)
    if rho >= 0.25:
        k = _modulus_from_ratio(2.0 * rho)
        return ((1.0 - k) / (1.0 + k)) ** 2
    km = _modulus_from_ratio(0.5 / rho)
    k = math.sqrt((1.0 - km) * (1.0 + km))
    return km ** 4 / (1.0 + k) ** 4


def elliptic_ratio_check(k):
    """K(k')/K(k) through the public elliptic integral, for cross-checks."""
    return elliptic_k(math.sqrt((1.0 - k) * (1.0 + k))) / elliptic_k(k)
