"""Shared numerical substrate.

Complex log-gamma (principal branch), Bernoulli numbers, Euler's constant,
adaptive panel quadrature for smooth integrands, and Filon-type quadrature
for integrands of the form envelope(x) * exp(i*Omega*x).

All functions are pure; nothing in this module holds mutable state.
"""

from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc

__all__ = [
    "NumericsError",
    "PoleError",
    "DomainError",
    "QuadratureError",
    "Constants",
    "QuadratureResult",
    "CONSTANTS",
    "EVALUATION_BUDGET",
    "log_gamma",
    "log_gamma_vec",
    "GammaLogExpansion",
    "gamma_log_expansion",
    "integrate_adaptive",
    "integrate_oscillatory",
    "gaussian_moment",
]


class NumericsError(Exception):
    """Base class for numerical-substrate failures."""


class PoleError(NumericsError):
    """Argument is at (or too close to) a pole."""


class DomainError(NumericsError):
    """Argument outside the supported regime."""


class QuadratureError(NumericsError):
    """Quadrature did not converge, or the integrand returned NaN."""


# Euler's constant and the even-index Bernoulli numbers B_2 .. B_20,
# stored as exact-as-possible doubles.
EULER_GAMMA = 0.5772156649015329

_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)

# Exact rational forms, used by the symbolic expansion machinery.
_BERNOULLI_EVEN_RATIONAL = (
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
)


@dataclass(frozen=True)
class Constants:
    """Euler's constant and Bernoulli numbers B_2..B_20 as doubles."""

    euler_gamma: float = EULER_GAMMA
    bernoulli: Sequence[float] = _BERNOULLI_EVEN


CONSTANTS = Constants()

# Hard cap on integrand evaluations per quadrature call.
EVALUATION_BUDGET = 1 << 20


@dataclass
class QuadratureResult:
    """Value, error estimate and evaluation count of one quadrature call."""

    value: complex
    error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")


# ----------------------------------------------------------------------
# log-gamma
# ----------------------------------------------------------------------

_STIRLING_RADIUS = 12.0


def _log_gamma_right(z: complex) -> complex:
    """Principal log-gamma for Re z >= 0.5 via shifted Stirling series."""
    shift = 0.0 + 0.0j
    while abs(z) < _STIRLING_RADIUS:
        shift += cmath.log(z)
        z += 1.0
    out = (z - 0.5) * cmath.log(z) - z + 0.5 * math.log(2.0 * math.pi)
    zp = z
    z2 = z * z
    for n, b in enumerate(_BERNOULLI_EVEN, start=1):
        out += b / ((2 * n) * (2 * n - 1) * zp)
        zp *= z2
    return out - shift


def log_gamma(s: complex) -> complex:
    """Principal branch of log Gamma(s).

    Uses a shifted Stirling series with Bernoulli terms B_2..B_20 in the
    right half plane and the reflection formula for Re s < 1/2.  Raises
    PoleError within 1e-12 of a nonpositive integer.
    """
    s = complex(s)
    if s.imag == 0.0 and abs(s.real - round(s.real)) < 1e-12 and round(s.real) <= 0:
        raise PoleError(f"log_gamma pole at nonpositive integer s={s}")
    if s.real >= 0.5:
        return _log_gamma_right(s)
    # Reflection.  For Im s >= 0 the representation
    #   sin(pi s) = (i/2) e^{-i pi s} (1 - e^{2 pi i s})
    # keeps log(1 - e^{2 pi i s}) on the principal sheet, and the combination
    # below lands on the principal branch of log-gamma (checked against an
    # arbitrary-precision oracle on a randomized left-half-plane grid).
    if s.imag < 0.0:
        return log_gamma(s.conjugate()).conjugate()
    log_sin = (
        0.5j * math.pi
        - math.log(2.0)
        - 1j * math.pi * s
        + cmath.log(1.0 - cmath.exp(2j * math.pi * s))
    )
    return math.log(math.pi) - log_sin - _log_gamma_right(1.0 - s)


def log_gamma_vec(s) -> np.ndarray:
    """Elementwise log_gamma over an array of complex arguments."""
    arr = np.asarray(s, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for i, z in enumerate(flat_in):
        flat_out[i] = log_gamma(z)
    return out


# ----------------------------------------------------------------------
# Asymptotic expansion of Gamma^(k)(s) / Gamma(s)
# ----------------------------------------------------------------------

# Terms are represented as {(j, i): coeff} meaning coeff * log(s)^j * s^(-i),
# with every series truncated at s^(-imax).


def _series_mul(a: dict, b: dict, imax: int) -> dict:
    out: dict = {}
    for (j1, i1), c1 in a.items():
        for (j2, i2), c2 in b.items():
            i = i1 + i2
            if i > imax:
                continue
            key = (j1 + j2, i)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _series_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, 0.0) + c
    return out


def _series_dds(a: dict, imax: int) -> dict:
    # d/ds [ log^j s * s^(-i) ] = j log^(j-1) s * s^(-i-1) - i log^j s * s^(-i-1)
    out: dict = {}
    for (j, i), c in a.items():
        if i + 1 <= imax:
            if j >= 1:
                key = (j - 1, i + 1)
                out[key] = out.get(key, 0.0) + j * c
            key = (j, i + 1)
            out[key] = out.get(key, 0.0) - i * c
    return out


def _digamma_series(imax: int) -> dict:
    # psi(s) ~ log s - 1/(2s) - sum_m B_{2m} / (2m s^{2m})
    out = {(1, 0): 1.0}
    if imax >= 1:
        out[(0, 1)] = -0.5
    for m, (p, q) in enumerate(_BERNOULLI_EVEN_RATIONAL, start=1):
        if 2 * m > imax:
            break
        out[(0, 2 * m)] = -p / (q * 2.0 * m)
    return out


@dataclass
class GammaLogExpansion:
    """Truncated expansion of Gamma^(k)(s)/Gamma(s) in log^j(s) and s^(-i).

    ``coeffs[(j, i)]`` multiplies log(s)^j * s^(-i).  ``b`` collects the pure
    log-power coefficients (i = 0) for j = 0..k and ``c`` the pure inverse
    powers (j = 0) for i = 1..order; mixed terms stay in ``coeffs``.
    """

    k: int
    order: int
    coeffs: dict

    @property
    def b(self) -> list:
        return [self.coeffs.get((j, 0), 0.0) for j in range(self.k + 1)]

    @property
    def c(self) -> list:
        return [self.coeffs.get((0, i), 0.0) for i in range(1, self.order + 1)]

    def evaluate(self, s: complex) -> complex:
        s = complex(s)
        ls = cmath.log(s)
        total = 0.0 + 0.0j
        for (j, i), coef in sorted(self.coeffs.items()):
            total += coef * ls**j * s ** (-i)
        return total


def gamma_log_expansion(s: complex, k: int, r: int) -> GammaLogExpansion:
    """Asymptotic coefficients of Gamma^(k)(s)/Gamma(s) to O(|s|^(-r-1)).

    The ratio satisfies R_1 = psi and R_{m+1} = R_m' + R_m * psi, which is
    carried out in a truncated ring of polynomials in log(s) and 1/s.  The
    argument ``s`` is only checked against the asymptotic-regime precondition
    |s| >= 2; the returned expansion itself does not depend on s.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    if r < 0:
        raise DomainError("r must be nonnegative")
    if abs(complex(s)) < 2.0:
        raise DomainError(f"|s| >= 2 required for the asymptotic regime, got {s!r}")
    imax = r
    psi = _digamma_series(imax)
    ratio = dict(psi)
    for _ in range(k - 1):
        ratio = _series_add(_series_dds(ratio, imax), _series_mul(ratio, psi, imax))
    return GammaLogExpansion(k=k, order=r, coeffs=ratio)


# ----------------------------------------------------------------------
# Adaptive quadrature
# ----------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _panel_value(f: Callable, a: float, b: float) -> complex:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _GL_NODES
    y = np.asarray(f(x), dtype=complex)
    if not np.all(np.isfinite(y)):
        raise QuadratureError(f"non-finite integrand on panel [{a}, {b}]")
    return half * complex(np.dot(_GL_WEIGHTS, y))


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
) -> QuadratureResult:
    """Adaptive panel quadrature of a complex-valued integrand on [a, b].

    ``f`` must accept a numpy array of abscissae and return the integrand
    values.  Panels carry a 15-point Gauss rule; the error of a panel is
    estimated by differencing against its two halves, and the panel with the
    largest estimate is refined until the total estimate meets
    ``tol * max(1, |value|)`` or the evaluation budget is exhausted.
    """
    if not (a < b):
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if not tol > 0:
        raise DomainError("tol must be positive")

    evals = 0

    def panel(lo: float, hi: float) -> complex:
        nonlocal evals
        evals += _GL_NODES.size
        return _panel_value(f, lo, hi)

    whole = panel(a, b)
    left = panel(a, 0.5 * (a + b))
    right = panel(0.5 * (a + b), b)
    # heap entries: (-err, lo, hi, coarse, refined_left, refined_right)
    counter = 0
    heap = [(-abs(whole - (left + right)), counter, a, b, left, right)]
    total = left + right
    total_err = abs(whole - (left + right))

    while total_err > tol * max(1.0, abs(total)) and heap:
        if evals + 4 * _GL_NODES.size > EVALUATION_BUDGET:
            raise QuadratureError(
                f"refinement budget of {EVALUATION_BUDGET} evaluations exhausted "
                f"(error estimate {total_err:.3e})"
            )
        neg_err, _, lo, hi, vleft, vright = heapq.heappop(heap)
        total_err += neg_err  # removes this panel's error from the running sum
        mid = 0.5 * (lo + hi)
        for seg_lo, seg_hi, coarse in ((lo, mid, vleft), (mid, hi, vright)):
            seg_mid = 0.5 * (seg_lo + seg_hi)
            sleft = panel(seg_lo, seg_mid)
            sright = panel(seg_mid, seg_hi)
            err = abs(coarse - (sleft + sright))
            total += (sleft + sright) - coarse
            total_err += err
            counter += 1
            heapq.heappush(heap, (-err, counter, seg_lo, seg_hi, sleft, sright))

    return QuadratureResult(value=complex(total), error_estimate=float(total_err), evaluations=evals)


# ----------------------------------------------------------------------
# Oscillatory (Filon-type) quadrature
# ----------------------------------------------------------------------

_FILON_DEGREE = 12
_FILON_NODES = np.cos(np.pi * np.arange(_FILON_DEGREE + 1) / _FILON_DEGREE)[::-1]
# Below this value of |Omega| * half-length a panel is not oscillatory and a
# plain Gauss rule on the full product integrand is both cheaper and safer.
_FILON_OSC_THRESHOLD = 15.0


def _filon_panel(envelope: Callable, omega: float, lo: float, hi: float) -> complex:
    """Integral of envelope(x) * exp(i omega x) over one panel.

    The envelope is interpolated by a Chebyshev-node polynomial in the local
    coordinate; the monomial moments against exp(i w u) are generated by the
    forward recursion, which is stable because it is only used when
    |w| >= degree.
    """
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid + half * _FILON_NODES
    y = np.asarray(envelope(x), dtype=complex)
    if not np.all(np.isfinite(y)):
        raise QuadratureError(f"non-finite envelope on panel [{lo}, {hi}]")
    w = omega * half
    if abs(w) < _FILON_OSC_THRESHOLD:
        ygl = np.asarray(envelope(mid + half * _GL_NODES), dtype=complex)
        if not np.all(np.isfinite(ygl)):
            raise QuadratureError(f"non-finite envelope on panel [{lo}, {hi}]")
        phase = np.exp(1j * omega * (mid + half * _GL_NODES))
        return half * complex(np.dot(_GL_WEIGHTS, ygl * phase))
    coeffs = np.polynomial.chebyshev.chebfit(_FILON_NODES, y, _FILON_DEGREE)
    poly = np.polynomial.chebyshev.cheb2poly(coeffs)
    # moments m_k = int_{-1}^{1} u^k e^{i w u} du
    iw = 1j * w
    e_plus = cmath.exp(iw)
    e_minus = cmath.exp(-iw)
    moments = np.empty(_FILON_DEGREE + 1, dtype=complex)
    moments[0] = (e_plus - e_minus) / iw
    for kk in range(1, _FILON_DEGREE + 1):
        boundary = (e_plus - ((-1) ** kk) * e_minus) / iw
        moments[kk] = boundary - (kk / iw) * moments[kk - 1]
    value = complex(np.dot(poly, moments))
    return half * value * cmath.exp(1j * omega * mid)


def integrate_oscillatory(
    envelope: Callable[[np.ndarray], np.ndarray],
    omega: float,
    a: float,
    b: float,
    tol: float,
) -> QuadratureResult:
    """Filon-type quadrature of envelope(x) * exp(i omega x) on [a, b].

    Panels adapt to the envelope alone, so the cost is governed by the
    envelope's smoothness rather than by omega.  The envelope must be smooth
    on [a, b]; it may itself oscillate slowly, in which case refinement
    resolves it.
    """
    if not (a < b):
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if abs(omega) * (b - a) < 2.0 * _FILON_OSC_THRESHOLD:
        res = integrate_adaptive(
            lambda x: np.asarray(envelope(x), dtype=complex) * np.exp(1j * omega * x),
            a,
            b,
            tol,
        )
        return res

    evals = 0

    def panel(lo: float, hi: float) -> complex:
        nonlocal evals
        evals += _FILON_DEGREE + 1
        return _filon_panel(envelope, omega, lo, hi)

    # start from a handful of panels so the first error estimates are local
    n0 = 8
    edges = np.linspace(a, b, n0 + 1)
    heap = []
    total = 0.0 + 0.0j
    total_err = 0.0
    counter = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        coarse = panel(lo, hi)
        mid = 0.5 * (lo + hi)
        vleft = panel(lo, mid)
        vright = panel(mid, hi)
        err = abs(coarse - (vleft + vright))
        total += vleft + vright
        total_err += err
        heapq.heappush(heap, (-err, counter, lo, hi, vleft, vright))
        counter += 1

    while total_err > tol * (1.0 + abs(total)) and heap:
        if evals + 6 * (_FILON_DEGREE + 1) > EVALUATION_BUDGET:
            raise QuadratureError(
                f"refinement budget of {EVALUATION_BUDGET} evaluations exhausted "
                f"(error estimate {total_err:.3e})"
            )
        neg_err, _, lo, hi, vleft, vright = heapq.heappop(heap)
        if -neg_err <= 0.0:
            heapq.heappush(heap, (neg_err, counter, lo, hi, vleft, vright))
            break
        total_err += neg_err
        mid = 0.5 * (lo + hi)
        for seg_lo, seg_hi, coarse in ((lo, mid, vleft), (mid, hi, vright)):
            seg_mid = 0.5 * (seg_lo + seg_hi)
            sleft = panel(seg_lo, seg_mid)
            sright = panel(seg_mid, seg_hi)
            err = abs(coarse - (sleft + sright))
            total += (sleft + sright) - coarse
            total_err += err
            heapq.heappush(heap, (-err, counter, seg_lo, seg_hi, sleft, sright))
            counter += 1

    return QuadratureResult(value=complex(total), error_estimate=float(total_err), evaluations=evals)


# ----------------------------------------------------------------------
# Truncated Gaussian moment
# ----------------------------------------------------------------------


def gaussian_moment(k: int, c: float, xi0: float) -> float:
    """int_{-Xi0}^{Xi0} xi^{2k} exp(-c xi^2 / 2) d xi.

    Returns the dominant closed form 2^{k+1/2} Gamma(k+1/2) c^{-1/2-k}
    multiplied by the exact truncation factor (a regularized incomplete
    gamma), so the result matches direct quadrature of the truncated
    integral.  Requires Xi0 * sqrt(c) >= 1.
    """
    if k < 0 or k != int(k):
        raise DomainError("k must be a nonnegative integer")
    if c <= 0 or xi0 <= 0:
        raise DomainError("c and Xi0 must be positive")
    if xi0 * math.sqrt(c) < 1.0:
        raise DomainError(
            f"precondition Xi0*sqrt(c) >= 1 violated: {xi0 * math.sqrt(c):.3g}"
        )
    main = 2.0 ** (k + 0.5) * math.gamma(k + 0.5) * c ** (-0.5 - k)
    return main * float(gammainc(k + 0.5, 0.5 * c * xi0 * xi0))
