"""Moment-side quantities: the Gaussian-weighted fourth moment, explicit main
terms, error-term extraction, secondary-coefficient fits, and the scan
statistics (growth exponents, sign changes, moment integrals of the error
term) used to probe its oscillation at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erf

from .core_numerics import DomainError, EULER_GAMMA
from .zeta_engine import (
    DEFAULT_ZETA_CONFIG,
    ZetaConfig,
    abs_zeta_pow4_batch,
    sharp_fourth_moment,
    zeta,
)
from .lambda_kernel import GaussianWeight

__all__ = [
    "MomentParameters",
    "SecondaryCoefficients",
    "MomentSample",
    "SandwichReport",
    "ScanReport",
    "weighted_moment_I2",
    "main_term",
    "main_term_threequarters",
    "fit_secondary_coefficients",
    "error_term_E2",
    "growth_exponent",
    "sign_change_scan",
    "error_moment_integral",
    "smoothing_sandwich_check",
    "residual_term_bound",
]

_GL15_NODES, _GL15_WEIGHTS = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class MomentParameters:
    """Admissible (sigma, T, G) triple for the smoothed fourth moment."""

    sigma: float
    T: float
    G: float

    def __post_init__(self) -> None:
        if not (0.5 < self.sigma < 1.0):
            raise DomainError(f"sigma = {self.sigma} outside (1/2, 1)")
        if self.T <= 0:
            raise DomainError("T must be positive")
        if not (self.T ** (1.0 / 3.0) <= self.G <= self.T**0.99):
            raise DomainError(
                f"G = {self.G:.4g} outside the window [T^(1/3), T^0.99] for T = {self.T:.4g}"
            )


@dataclass(frozen=True)
class SecondaryCoefficients:
    """Fitted coefficients of the T^(2-2 sigma) log-polynomial main term."""

    a0: float
    a1: float
    a2: float
    fit_window: tuple
    fit_residual: float
    std_errors: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not math.isfinite(self.fit_residual) or self.fit_residual < 0:
            raise DomainError("fit_residual must be finite and nonnegative")

    def as_tuple(self) -> tuple:
        return (self.a0, self.a1, self.a2)


@dataclass
class MomentSample:
    """One evaluation point of the moment pipeline."""

    T: float
    sigma: float
    sharp_moment: float
    main_term: float
    E2: float
    spectral_prediction: float | None = None

    def __post_init__(self) -> None:
        if self.E2 != self.sharp_moment - self.main_term:
            raise ValueError("E2 must equal sharp_moment - main_term identically")


def weighted_moment_I2(
    p: MomentParameters,
    tol: float = 1e-8,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> float:
    """(1/(sqrt(pi) G)) * int |zeta(sigma + it + iT)|^4 exp(-(t/G)^2) dt.

    The range is truncated where the Gaussian tail drops below the
    tolerance; the ordinate is reflected through 0 (the integrand is even in
    the imaginary part), so centers T < window width are fine.
    """
    if p.T > 1.0e4:
        raise DomainError("desk-scale window requires T <= 1e4")
    half = 6.0 * p.G * math.sqrt(max(1.0, math.log(1.0 / tol)) / 36.0 + 1.0)
    lo, hi = p.T - half, p.T + half
    n_panels = max(64, int(math.ceil((hi - lo) / 0.25)))
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    hw = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + hw * _GL15_NODES).ravel()
    vals = abs_zeta_pow4_batch(p.sigma, np.abs(nodes), cfg)
    weights = np.exp(-(((nodes - p.T) / p.G) ** 2))
    panel_vals = (vals * weights).reshape(n_panels, -1) @ _GL15_WEIGHTS * hw
    return float(np.sum(panel_vals) / (math.sqrt(math.pi) * p.G))


def _lead_terms(T: float, sigma: float, cfg: ZetaConfig) -> float:
    z2s = zeta(complex(2.0 * sigma, 0.0), cfg).real
    z4s = zeta(complex(4.0 * sigma, 0.0), cfg).real
    z22 = zeta(complex(2.0 - 2.0 * sigma, 0.0), cfg).real
    z44 = zeta(complex(4.0 - 4.0 * sigma, 0.0), cfg).real
    first = z2s**4 / z4s * T
    second = T / (3.0 - 4.0 * sigma) * (T / (2.0 * math.pi)) ** (2.0 - 4.0 * sigma) * z22**4 / z44
    return first + second


def main_term(
    T: float,
    sigma: float,
    a: SecondaryCoefficients,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> float:
    """Explicit main term of the fourth moment for sigma in (1/2,1) \\ {3/4}."""
    if not (0.5 < sigma < 1.0):
        raise DomainError(f"sigma = {sigma} outside (1/2, 1)")
    if abs(sigma - 0.75) < 1e-3:
        raise DomainError(
            "sigma within 1e-3 of 3/4: the (3-4 sigma)^(-1) factor is singular; "
            "use main_term_threequarters"
        )
    if T <= 0:
        return 0.0
    log_t = math.log(T)
    poly = a.a0 + a.a1 * log_t + a.a2 * log_t * log_t
    return _lead_terms(T, sigma, cfg) + T ** (2.0 - 2.0 * sigma) * poly


def main_term_threequarters(
    T: float,
    A: Sequence[float],
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> float:
    """Main term at sigma = 3/4: zeta^4(3/2)/zeta(3) T + sqrt(T) log-poly."""
    if T < 0:
        raise DomainError("T must be nonnegative")
    if T == 0.0:
        return 0.0
    z32 = zeta(complex(1.5, 0.0), cfg).real
    z3 = zeta(complex(3.0, 0.0), cfg).real
    log_t = math.log(T)
    poly = A[0] + A[1] * log_t + A[2] * log_t * log_t
    return z32**4 / z3 * T + math.sqrt(T) * poly


def fit_secondary_coefficients(
    samples: Sequence[tuple],
    sigma: float,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> SecondaryCoefficients:
    """Least-squares fit of (a0, a1, a2) in the model
    sharp_moment - leading terms = T^(2-2 sigma)(a0 + a1 log T + a2 log^2 T).

    Needs at least 12 samples spanning an octave in T.  Raises on a
    condition number above 1e12 (window too narrow for the log powers).
    """
    if len(samples) < 12:
        raise DomainError("need at least 12 samples")
    ts = np.asarray([s[0] for s in samples], dtype=float)
    moments = np.asarray([s[1] for s in samples], dtype=float)
    if ts.max() < 2.0 * ts.min():
        raise DomainError("samples must span at least one octave in T")
    resid = moments - np.asarray([_lead_terms(t, sigma, cfg) for t in ts])
    scale = ts ** (2.0 - 2.0 * sigma)
    logs = np.log(ts)
    design = np.column_stack([scale, scale * logs, scale * logs**2])
    cond = np.linalg.cond(design)
    if cond > 1e12:
        raise DomainError(f"design matrix condition number {cond:.3e} > 1e12")
    coeffs, _, _, _ = np.linalg.lstsq(design, resid, rcond=None)
    fitted = design @ coeffs
    residual = resid - fitted
    rms = float(np.sqrt(np.mean(residual**2)))
    dof = max(len(samples) - 3, 1)
    var = float(np.sum(residual**2)) / dof
    try:
        cov = var * np.linalg.inv(design.T @ design)
        stderr = tuple(float(x) for x in np.sqrt(np.diag(cov)))
    except np.linalg.LinAlgError:
        stderr = (float("inf"),) * 3
    return SecondaryCoefficients(
        a0=float(coeffs[0]),
        a1=float(coeffs[1]),
        a2=float(coeffs[2]),
        fit_window=(float(ts.min()), float(ts.max())),
        fit_residual=rms,
        std_errors=stderr,
    )


def error_term_E2(
    T: float,
    sigma: float,
    a: SecondaryCoefficients,
    tol: float = 1e-8,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
    sharp: float | None = None,
) -> MomentSample:
    """Error term after the explicit main term; the defining identity
    E2 = sharp_moment - main_term holds exactly.  ``sharp`` may carry a
    precomputed moment (one prefix pass serves a whole T-grid)."""
    if sharp is None:
        sharp = sharp_fourth_moment(sigma, T, tol, cfg)
    main = main_term(T, sigma, a, cfg)
    return MomentSample(T=T, sigma=sigma, sharp_moment=sharp, main_term=main, E2=sharp - main)


def growth_exponent(samples: Sequence[tuple]) -> tuple:
    """OLS slope of log(running max |value|) against log T, with half-width.

    Returns (slope, half_width).  Needs >= 16 samples spanning two octaves
    and at least one nonzero value.
    """
    if len(samples) < 16:
        raise DomainError("need at least 16 samples")
    ts = np.asarray([s[0] for s in samples], dtype=float)
    vals = np.abs(np.asarray([s[1] for s in samples], dtype=float))
    if np.all(vals == 0.0):
        raise DomainError("degenerate data: all values zero")
    if ts.max() < 4.0 * ts.min():
        raise DomainError("samples must span at least two octaves in T")
    running = np.maximum.accumulate(vals)
    mask = running > 0
    x = np.log(ts[mask])
    y = np.log(running[mask])
    design = np.column_stack([x, np.ones_like(x)])
    (slope, _), res, _, _ = np.linalg.lstsq(design, y, rcond=None)
    n = x.size
    if n > 2 and res.size:
        var = float(res[0]) / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        half = 1.96 * math.sqrt(var / sxx)
    else:
        half = 0.0
    return float(slope), float(half)


@dataclass
class ScanReport:
    """Sign-change intervals plus the count in each dyadic window."""

    intervals: list
    dyadic_counts: list


def sign_change_scan(samples: Sequence[tuple], max_spacing: float = 1.0) -> ScanReport:
    """All consecutive-sample pairs with opposite E2 signs.

    Samples must be ordered in T with spacing at most ``max_spacing`` (the
    default 1 resolves the slowest desk-scale oscillation of the error
    term).  Dyadic windows are [T0 2^k, T0 2^(k+1)) anchored at the first
    sample.
    """
    ts = np.asarray([s[0] for s in samples], dtype=float)
    vals = np.asarray([s[1] for s in samples], dtype=float)
    if ts.size >= 2:
        gaps = np.diff(ts)
        if np.any(gaps <= 0):
            raise DomainError("samples must be strictly increasing in T")
        if np.any(gaps > max_spacing * (1.0 + 1e-9)):
            raise DomainError(f"sample spacing exceeds {max_spacing}")
    intervals = []
    for i in range(ts.size - 1):
        if vals[i] * vals[i + 1] < 0.0:
            intervals.append((float(ts[i]), float(ts[i + 1])))
    counts = []
    if ts.size:
        lo = float(ts[0])
        t_max = float(ts[-1])
        while lo < t_max:
            hi = 2.0 * lo
            n = sum(1 for (a, b) in intervals if lo <= a < hi)
            counts.append((lo, min(hi, t_max), n))
            lo = hi
    return ScanReport(intervals=intervals, dyadic_counts=counts)


def error_moment_integral(samples: Sequence[tuple], exponent: float) -> float:
    """Trapezoid approximation of int |E2(t)|^exponent dt over the sample
    range; monotone nondecreasing in the range end."""
    if exponent < 1.0:
        raise DomainError("exponent must be at least 1")
    ts = np.asarray([s[0] for s in samples], dtype=float)
    vals = np.abs(np.asarray([s[1] for s in samples], dtype=float)) ** exponent
    if ts.size < 2:
        return 0.0
    if np.any(np.diff(ts) <= 0):
        raise DomainError("samples must be strictly increasing in T")
    return float(np.trapezoid(vals, ts))


@dataclass
class SandwichReport:
    """Numerical check of the smoothing sandwich around the dyadic moment."""

    sharp: float
    outer: float
    inner: float
    slack_outer: float
    slack_inner: float
    inner_mass_min: float
    inner_window_empty: bool


def _window_mass(u: np.ndarray, t1: float, t2: float, G: float) -> np.ndarray:
    return 0.5 * (erf((t2 - u) / G) - erf((t1 - u) / G))


def _windowed_moment(
    sigma: float, t1: float, t2: float, G: float, cfg: ZetaConfig
) -> float:
    """int_{t1}^{t2} I2(t, sigma; G) dt, computed as a single u-integral of
    |zeta(sigma+iu)|^4 against the erf window mass."""
    lo = t1 - 8.0 * G
    hi = t2 + 8.0 * G
    n_panels = max(64, int(math.ceil((hi - lo) / 0.25)))
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    hw = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + hw * _GL15_NODES).ravel()
    vals = abs_zeta_pow4_batch(sigma, np.abs(nodes), cfg)
    mass = _window_mass(nodes, t1, t2, G)
    panel_vals = (vals * mass).reshape(n_panels, -1) @ _GL15_WEIGHTS * hw
    return float(np.sum(panel_vals))


def smoothing_sandwich_check(
    T: float,
    p: MomentParameters,
    tol: float = 1e-8,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> SandwichReport:
    """Verify that the dyadic sharp moment is squeezed between smoothed
    moments over widened and narrowed windows.

    outer = int I2 over [T - G log T, 2T + G log T] must dominate the sharp
    moment over [T, 2T]; inner = int I2 over [T + G log T, 2T - G log T]
    (empty if inverted) must stay below it.  Also reports the minimum of the
    inner Gaussian window mass over [T, 2T], which the derivation needs to
    be 1 + O(e^(-log^2 T)).
    """
    sigma, G = p.sigma, p.G
    margin = G * math.log(T)
    sharp = sharp_fourth_moment(sigma, 2.0 * T, tol, cfg) - sharp_fourth_moment(
        sigma, T, tol, cfg
    )
    outer = _windowed_moment(sigma, T - margin, 2.0 * T + margin, G, cfg)
    inner_lo, inner_hi = T + margin, 2.0 * T - margin
    empty = inner_lo >= inner_hi
    inner = 0.0 if empty else _windowed_moment(sigma, inner_lo, inner_hi, G, cfg)
    u = np.linspace(T, 2.0 * T, 513)
    mass = _window_mass(u, T - margin, 2.0 * T + margin, G)
    return SandwichReport(
        sharp=sharp,
        outer=outer,
        inner=inner,
        slack_outer=outer - sharp,
        slack_inner=sharp - inner,
        inner_mass_min=float(np.min(mass)),
        inner_window_empty=empty,
    )


def residual_term_bound(
    w: GaussianWeight,
    sigma: float,
    cfg: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> float:
    """Upper bound for the residual-part correction term beyond the main
    term: 8 pi zeta(2 sigma - 1)^2 {(c_E - zeta'/zeta(2 sigma - 1)) g((sigma-1)i)
    + i g'((sigma-1)i)/2} for the Gaussian weight, whose modulus decays like
    exp(-(T^2 - (1-sigma)^2)/G^2)."""
    if not (0.5 < sigma < 1.0):
        raise DomainError(f"sigma = {sigma} outside (1/2, 1)")
    T, G = w.center_T, w.width_G
    x = 2.0 * sigma - 1.0
    zx = zeta(complex(x, 0.0), cfg).real
    h = 1e-6
    dzx = (zeta(complex(x + h, 0.0), cfg).real - zeta(complex(x - h, 0.0), cfg).real) / (2.0 * h)
    log_envelope = -(T * T - (1.0 - sigma) ** 2) / (G * G)
    envelope = math.exp(max(log_envelope, -745.0)) if log_envelope > -745.0 else 0.0
    g_bound = envelope / (math.sqrt(math.pi) * G)
    gprime_bound = 2.0 * (T + 1.0) / (G * G) * envelope / (math.sqrt(math.pi) * G)
    return (
        8.0
        * math.pi
        * zx
        * zx
        * (abs(EULER_GAMMA - dzx / zx) * g_bound + 0.5 * gprime_bound)
    )
