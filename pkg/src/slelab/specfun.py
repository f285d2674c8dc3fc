"""Self-contained special functions used by the closed-form observables.

Gamma, the Gauss hypergeometric function on [0, 1) with derivative and
value-at-1, the complete elliptic integral via the AGM, and an adaptive
quadrature rule. No scipy.special anywhere: the test suite compares these
against an independent arbitrary-precision oracle, and that comparison is
only meaningful if the implementations are our own.
"""

import math


class NonConvergenceError(ArithmeticError):
    """A series or subdivision failed to reach the requested tolerance."""


# Lanczos approximation, g = 7, 9 coefficients. Good to ~1e-14 relative on
# the positive half line, which covers the 1e-12 contract on [0.05, 60].
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    """Gamma function for real x, poles at the non-positive integers."""
    if x <= 0.0 and x == math.floor(x):
        raise ValueError("gamma pole at non-positive integer x=%g" % x)
    if x < 0.5:
        # reflection keeps the Lanczos argument in the well-conditioned range
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def _rgamma(x):
    """1/gamma(x), returning exactly 0.0 at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / gamma(x)


def _is_nonpositive_int(t):
    return t <= 0.0 and t == math.floor(t)


def _series_2f1(a, b, c, x, max_terms=500_000):
    # plain power series; geometric tail for |x| < 1
    total = 1.0
    term = 1.0
    small = 0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        total += term
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise NonConvergenceError(
        "2F1 series stalled: a=%g b=%g c=%g x=%g" % (a, b, c, x))


def _poly_2f1(a, b, c, x):
    # terminating case: one of a, b is a non-positive integer
    n = int(-a) if _is_nonpositive_int(a) else int(-b)
    if _is_nonpositive_int(a) and _is_nonpositive_int(b):
        n = min(int(-a), int(-b))
    total = 1.0
    term = 1.0
    for k in range(n):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        total += term
    return total


def hyp2f1(a, b, c, x):
    """Gauss hypergeometric 2F1(a, b; c; x) for 0 <= x < 1.

    Terminating series are evaluated exactly as polynomials. Otherwise the
    power series is used up to x = 1/2, and beyond that the value is
    assembled from series at argument 1-x via the standard connection
    formula. When c-a-b is too close to an integer for that formula's
    gamma factors (including the integer case itself), an Euler transform
    plus direct series keeps the evaluation stable; with x near 1 this
    branch trades speed for robustness.
    """
    if _is_nonpositive_int(c):
        raise ValueError("2F1 undefined for non-positive integer c=%g" % c)
    if x < 0.0 or x >= 1.0:
        raise ValueError("2F1 supported on 0 <= x < 1, got x=%g" % x)
    if x == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _poly_2f1(a, b, c, x)
    if x <= 0.5:
        return _series_2f1(a, b, c, x)

    d = c - a - b
    if abs(d - round(d)) >= 1e-3:
        # connection formula: both inner series run at argument 1-x < 1/2
        y = 1.0 - x
        t1 = gamma(c) * gamma(d) * _rgamma(c - a) * _rgamma(c - b)
        t2 = gamma(c) * gamma(-d) * _rgamma(a) * _rgamma(b)
        s1 = _series_2f1(a, b, 1.0 - d, y) if t1 != 0.0 else 0.0
        s2 = _series_2f1(c - a, c - b, 1.0 + d, y) if t2 != 0.0 else 0.0
        return t1 * s1 + y ** d * t2 * s2

    # near-integer exponent difference: the connection coefficients blow up,
    # so transform to parameters (c-a, c-b) and run the series head-on
    if _is_nonpositive_int(c - a) or _is_nonpositive_int(c - b):
        return (1.0 - x) ** d * _poly_2f1(c - a, c - b, c, x)
    return (1.0 - x) ** d * _series_2f1(c - a, c - b, c, x)


def hyp2f1_at_1(a, b, c):
    """Limit of 2F1 at x=1 via the Gauss sum; requires c - a - b > 0."""
    if c - a - b <= 0.0:
        raise ValueError("2F1 diverges at x=1 when c-a-b <= 0 (got %g)" % (c - a - b))
    if _is_nonpositive_int(c):
        raise ValueError("2F1 undefined for non-positive integer c=%g" % c)
    return gamma(c) * gamma(c - a - b) * _rgamma(c - a) * _rgamma(c - b)


def hyp2f1_deriv(a, b, c, x):
    """d/dx 2F1(a, b; c; x) through the contiguous relation."""
    return a * b / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, x)


def elliptic_k(k):
    """Complete elliptic integral K(k), modulus convention K(0) = pi/2."""
    if not 0.0 <= k < 1.0:
        raise ValueError("elliptic_k needs 0 <= k < 1, got %g" % k)
    # AGM(1, k') with k' computed cancellation-free
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(60):
        if abs(a - b) <= 1e-17 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def agm_ratio(k):
    """K(k')/K(k) for the modulus k, stable down to very small k.

    Uses K(k') = pi / (2 AGM(1, k)) so that the complementary modulus is
    never formed explicitly; k near 0 would otherwise lose it to rounding.
    """
    if not 0.0 < k < 1.0:
        raise ValueError("modulus must lie strictly in (0,1), got %g" % k)

    def agm(a, b):
        for _ in range(80):
            if abs(a - b) <= 1e-17 * a:
                break
            a, b = 0.5 * (a + b), math.sqrt(a * b)
        return a

    return agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))) / agm(1.0, k)


# 7-point Gauss / 15-point Kronrod pair on [-1, 1]
_KRONROD_X = (
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
)
_KRONROD_W = (
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
)
_GAUSS_W = (
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
)


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (lo + hi)
    fk = [f(mid + half * xi) for xi in _KRONROD_X]
    kron = half * sum(w * v for w, v in zip(_KRONROD_W, fk))
    gauss = half * sum(w * fk[2 * i + 1] for i, w in enumerate(_GAUSS_W))
    return kron, abs(kron - gauss)


def integrate(f, lo, hi, tol=1e-10, max_intervals=20_000):
    """Adaptive Gauss-Kronrod quadrature, absolute error target tol.

    Nodes are interior, so f is never evaluated at lo or hi and integrable
    power-law endpoint singularities (exponent > -1) resolve by subdivision
    alone; shifting the endpoints inward would silently discard singular
    mass (2*sqrt(delta) of it for an inverse square root).
    """
    if hi <= lo:
        raise ValueError("integrate needs lo < hi")
    val, err = _gk15(f, lo, hi)
    segments = [(err, lo, hi, val)]
    total_err = err
    for _ in range(max_intervals):
        if total_err <= tol:
            return sum(s[3] for s in segments)
        segments.sort(key=lambda s: s[0])
        err, a, b, val = segments.pop()
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        segments.append((e1, a, m, v1))
        segments.append((e2, m, b, v2))
        total_err += e1 + e2 - err
    raise NonConvergenceError(
        "quadrature did not reach tol=%g (err=%g, %d intervals)"
        % (tol, total_err, len(segments)))
