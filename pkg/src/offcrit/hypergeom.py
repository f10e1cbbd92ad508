"""Gauss hypergeometric function F(alpha, beta; gamma; z) in the regimes the
oscillatory kernel needs: the defining series for |z| <= 0.9 and the
quadratic transformation for gamma = 2*beta, which maps the kernel's
arguments to a tiny effective argument and is uniformly stable in the
spectral parameter.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .core_numerics import DomainError

__all__ = [
    "HypParams",
    "hyp2f1_series",
    "hyp2f1_quadratic",
    "hyp2f1",
]

_SERIES_MAX_TERMS = 100_000
_SERIES_RADIUS = 0.9


@dataclass(frozen=True)
class HypParams:
    alpha: complex
    beta: complex
    gamma: complex
    z: complex

    def __post_init__(self) -> None:
        g = complex(self.gamma)
        if g.imag == 0.0 and abs(g.real - round(g.real)) < 1e-12 and round(g.real) <= 0:
            raise DomainError(f"gamma = {g} is a nonpositive integer")


def hyp2f1_series(p: HypParams, tol: float = 1e-14) -> complex:
    """Defining power series, truncated once a geometric tail bound is < tol.

    Requires |z| <= 0.9; inside that disk the term ratio eventually contracts
    and the remaining tail is bounded by a geometric series.
    """
    a, b, g, z = complex(p.alpha), complex(p.beta), complex(p.gamma), complex(p.z)
    az = abs(z)
    if az > _SERIES_RADIUS:
        raise DomainError(
            f"|z| = {az:.3g} > {_SERIES_RADIUS}: series route converges too slowly"
        )
    if z == 0:
        return 1.0 + 0.0j
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((g + k) * (k + 1)) * z
        total += term
        # once the term ratio is uniformly below q < 1, tail < |term| q/(1-q)
        k1 = k + 1
        q = az * (1.0 + abs(a) / k1) * (1.0 + abs(b) / k1) / max(1e-300, abs(1.0 + g / k1))
        if q < 1.0 and abs(term) * q / (1.0 - q) < tol * max(1.0, abs(total)):
            return total
    raise DomainError("hypergeometric series failed to converge within the term cap")


def hyp2f1_quadratic(alpha: complex, beta: complex, z: complex, tol: float = 1e-14) -> complex:
    """F(alpha, beta; 2*beta; z) via the quadratic transformation.

    Evaluates ((1+sqrt(1-z))/2)^(-2 alpha) *
    F(alpha, alpha-beta+1/2; beta+1/2; ((1-sqrt(1-z))/(1+sqrt(1-z)))^2)
    on the principal branch of sqrt(1-z).  Requires |arg(1-z)| < pi and
    2*beta not in {-1, -3, -5, ...}.
    """
    alpha, beta, z = complex(alpha), complex(beta), complex(z)
    two_beta = 2.0 * beta
    if (
        two_beta.imag == 0.0
        and abs(two_beta.real - round(two_beta.real)) < 1e-12
        and round(two_beta.real) <= -1
        and round(two_beta.real) % 2 != 0
    ):
        raise DomainError(f"2*beta = {two_beta} is a negative odd integer")
    one_minus = 1.0 - z
    if one_minus.real < 0 and one_minus.imag == 0.0:
        raise DomainError(f"1 - z = {one_minus} lies on the branch cut")
    if z == 0:
        return 1.0 + 0.0j
    root = cmath.sqrt(one_minus)
    w = (1.0 - root) / (1.0 + root)
    inner = HypParams(alpha=alpha, beta=alpha - beta + 0.5, gamma=beta + 0.5, z=w * w)
    prefactor = cmath.exp(-2.0 * alpha * cmath.log(0.5 * (1.0 + root)))
    return prefactor * hyp2f1_series(inner, tol)


def hyp2f1(p: HypParams, tol: float = 1e-14) -> complex:
    """Route dispatcher.

    Prefers the quadratic transformation when gamma = 2*beta (its effective
    argument |w^2| is far smaller than |z|); otherwise falls back to the
    series when |z| <= 0.9.
    """
    g, b, z = complex(p.gamma), complex(p.beta), complex(p.z)
    if abs(g - 2.0 * b) < 1e-12:
        one_minus = 1.0 - z
        on_cut = one_minus.real < 0 and one_minus.imag == 0.0
        if not on_cut:
            root = cmath.sqrt(one_minus)
            w2 = abs((1.0 - root) / (1.0 + root)) ** 2
            if w2 < abs(z) or abs(z) > _SERIES_RADIUS:
                return hyp2f1_quadratic(p.alpha, b, z, tol)
    if abs(z) <= _SERIES_RADIUS:
        return hyp2f1_series(p, tol)
    raise DomainError(
        f"no supported route for alpha={p.alpha}, beta={b}, gamma={g}, z={z}"
    )
