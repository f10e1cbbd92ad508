"""Maass cusp-form spectral data: ingestion and validation, Hecke series
values through the smoothed Dirichlet sum and its contour-integral
correction, the spectral prediction sum, and the spectral-average tables.

Data files are two CSVs (see ``load_spectral_dataset``): a forms file with
one row per cusp form and a Hecke file with eigenvalues at prime powers.
The loader synthesizes composite indices through Hecke multiplicativity and
rejects records violating the structural invariants (multiplicativity,
parity vanishing of the central value, Katok-Sarnak nonnegativity).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

from .core_numerics import (
    DomainError,
    integrate_adaptive,
    log_gamma,
)
from .lambda_kernel import SADDLE_CALIBRATION, saddle_point
from .moment_lab import MomentParameters
from .zeta_engine import DEFAULT_ZETA_CONFIG, zeta

__all__ = [
    "MaassFormRecord",
    "SpectralDataset",
    "SpectralSum",
    "DatasetError",
    "load_spectral_dataset",
    "default_dataset_path",
    "hecke_series_smoothed",
    "afe_correction",
    "hecke_value_afe",
    "spectral_sum_S",
    "spectral_average_partial_sums",
    "kappa_class_sums",
    "spectral_constant",
]

C3 = -1.0 / 48.0


class DatasetError(DomainError):
    """Parse or invariant failure while loading spectral data."""


@dataclass
class MaassFormRecord:
    """One cusp form: spectral parameter, parity, weight, Hecke eigenvalues,
    central value, and cached Hecke-series values keyed by sigma."""

    index_j: int
    kappa: float
    parity: int
    alpha: float
    hecke: dict
    central_value: float
    cached_H: dict = field(default_factory=dict)

    def hecke_value(self, n: int) -> float:
        try:
            return self.hecke[n]
        except KeyError:
            raise DatasetError(
                f"form {self.index_j}: Hecke eigenvalue t({n}) not available"
            ) from None

    def validate(self, n_max: int, tol: float = 1e-8) -> None:
        if self.alpha <= 0:
            raise DatasetError(f"form {self.index_j}: alpha must be positive")
        if self.parity not in (-1, 1):
            raise DatasetError(f"form {self.index_j}: parity must be +1 or -1")
        if self.central_value < 0:
            raise DatasetError(
                f"form {self.index_j}: central value {self.central_value} < 0 "
                f"violates nonnegativity"
            )
        if self.parity == -1 and self.central_value != 0.0:
            raise DatasetError(
                f"form {self.index_j}: odd parity requires a vanishing central value"
            )
        if self.hecke.get(1) != 1.0:
            raise DatasetError(f"form {self.index_j}: t(1) must be 1")
        for m in range(2, int(math.isqrt(n_max)) + 1):
            for n in range(m, n_max // m + 1):
                g = math.gcd(m, n)
                rhs = 0.0
                for d in _divisors(g):
                    rhs += self.hecke_value(m * n // (d * d))
                lhs = self.hecke_value(m) * self.hecke_value(n)
                if abs(lhs - rhs) > tol * max(1.0, abs(lhs)):
                    raise DatasetError(
                        f"form {self.index_j}: Hecke multiplicativity fails at "
                        f"(m, n) = ({m}, {n}): {lhs} vs {rhs}"
                    )


def _divisors(n: int) -> list:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _factorize(n: int) -> dict:
    out: dict = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass
class SpectralDataset:
    records: list
    N_max: int
    provenance: str = ""

    def __post_init__(self) -> None:
        kappas = [rec.kappa for rec in self.records]
        if any(b <= a for a, b in zip(kappas, kappas[1:])):
            raise DatasetError("records must be strictly increasing in kappa")

    def __len__(self) -> int:
        return len(self.records)

    def up_to(self, kappa_max: float) -> list:
        return [rec for rec in self.records if rec.kappa <= kappa_max]


def default_dataset_path() -> Path:
    """Location of the packaged level-1 dataset (forms file)."""
    return Path(__file__).parent / "data" / "level1_forms.csv"


def _read_csv_with_headers(path: Path) -> tuple[dict, list, list]:
    meta: dict = {}
    rows = []
    header: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if not header:
                header = cells
            else:
                rows.append(cells)
    return meta, header, rows


def load_spectral_dataset(source, n_max: int = 0) -> SpectralDataset:
    """Load and validate a spectral dataset.

    ``source`` is the forms file; the Hecke file is expected next to it with
    the suffix ``_hecke`` before the extension (e.g. ``level1_forms.csv`` and
    ``level1_forms_hecke.csv``).  Supported normalization flags: forms file
    ``alpha`` (native weights) or ``sym2l`` (column carries L(1, sym^2);
    converted via alpha = 4/L); Hecke file ``hecke_t`` (native) or
    ``arithmetic`` (T(n)-eigenvalues without the n^(-1/2) scaling; divided
    by sqrt(n)).  Composite Hecke indices are synthesized through
    multiplicativity; prime powers beyond the shipped rows come from the
    Hecke recursion.  Every record is validated before the dataset is
    returned.
    """
    forms_path = Path(source)
    if not forms_path.exists():
        raise DatasetError(f"forms file not found: {forms_path}")
    hecke_path = forms_path.with_name(
        forms_path.stem + "_hecke" + forms_path.suffix
    )
    meta, header, rows = _read_csv_with_headers(forms_path)
    if not rows:
        return SpectralDataset(records=[], N_max=n_max, provenance=meta.get("provenance", ""))

    norm = meta.get("normalization", "alpha")
    if norm not in ("alpha", "sym2l"):
        raise DatasetError(f"unsupported forms normalization flag {norm!r}")
    expected = ["j", "kappa", "epsilon", "alpha", "H_half"]
    if header[: len(expected)] != expected:
        raise DatasetError(f"forms header must start with {expected}, got {header}")
    cache_sigmas = []
    for col in header[len(expected) :]:
        if not col.startswith("H_"):
            raise DatasetError(f"unexpected forms column {col!r}")
        cache_sigmas.append(float(col[2:]))

    hecke_table: dict = {}
    if hecke_path.exists():
        hmeta, hheader, hrows = _read_csv_with_headers(hecke_path)
        hnorm = hmeta.get("normalization", "hecke_t")
        if hnorm not in ("hecke_t", "arithmetic"):
            raise DatasetError(f"unsupported hecke normalization flag {hnorm!r}")
        if hheader != ["j", "n", "t"]:
            raise DatasetError(f"hecke header must be j,n,t, got {hheader}")
        for cells in hrows:
            if len(cells) != 3:
                raise DatasetError(f"malformed hecke row {cells}")
            j, n, t = int(cells[0]), int(cells[1]), float(cells[2])
            if hnorm == "arithmetic":
                t /= math.sqrt(n)
            hecke_table.setdefault(j, {})[n] = t

    records = []
    for line_no, cells in enumerate(rows, start=1):
        if len(cells) != len(header):
            raise DatasetError(f"forms row {line_no}: expected {len(header)} cells")
        try:
            j = int(cells[0])
            kappa = float(cells[1])
            parity = int(cells[2])
            weight = float(cells[3])
            h_half = float(cells[4])
        except ValueError as exc:
            raise DatasetError(f"forms row {line_no}: {exc}") from None
        if norm == "sym2l":
            if weight <= 0:
                raise DatasetError(f"forms row {line_no}: L(1, sym^2) must be positive")
            weight = 4.0 / weight
        cached = {}
        for sig, cell in zip(cache_sigmas, cells[len(expected) :]):
            if cell:
                cached[sig] = float(cell)
        primes_map = hecke_table.get(j, {})
        hecke = _extend_hecke(primes_map, n_max)
        rec = MaassFormRecord(
            index_j=j,
            kappa=kappa,
            parity=parity,
            alpha=weight,
            hecke=hecke,
            central_value=h_half,
            cached_H=cached,
        )
        rec.validate(min(n_max, max(hecke) if hecke else 1))
        records.append(rec)

    records.sort(key=lambda rec: rec.kappa)
    ds = SpectralDataset(
        records=records, N_max=n_max, provenance=meta.get("provenance", "")
    )
    if meta.get("family", "") == "level1-standard" and records:
        if abs(records[0].kappa - 9.5337) > 1e-3:
            raise DatasetError(
                f"standard level-1 dataset must start at kappa ~ 9.5337, "
                f"got {records[0].kappa}"
            )
    return ds


def _extend_hecke(primes_map: dict, n_max: int) -> dict:
    """Fill t(n) for all n <= n_max from prime-power data.

    Shipped prime powers are used as-is; missing powers come from the Hecke
    recursion t(p^(k+1)) = t(p) t(p^k) - t(p^(k-1)); composites multiply.
    """
    out = {1: 1.0}
    if n_max < 2:
        return out
    primes = sorted({min(_factorize(p)) for p in primes_map if len(_factorize(p)) == 1})
    for p in primes:
        power = p
        k = 1
        prev, cur = 1.0, primes_map[p]
        while power <= n_max:
            out[power] = primes_map.get(power, cur)
            cur = out[power]
            nxt_power = power * p
            if nxt_power <= n_max:
                nxt = primes_map.get(
                    nxt_power, primes_map[p] * cur - prev
                )
                prev, cur = cur, nxt
            power = nxt_power
            k += 1
    for n in range(2, n_max + 1):
        if n in out:
            continue
        fac = _factorize(n)
        value = 1.0
        ok = True
        for p, e in fac.items():
            if p**e not in out:
                ok = False
                break
            value *= out[p**e]
        if ok:
            out[n] = value
    return out


# ----------------------------------------------------------------------
# Hecke series values
# ----------------------------------------------------------------------


def _smooth_weight(f: float, K: float, mu: float) -> float:
    x = mu * math.log(f / K)
    if x > 700.0:
        return 0.0
    return math.exp(-math.exp(x)) if x > -700.0 else 1.0


def hecke_series_smoothed(rec: MaassFormRecord, tau: float, K: float, mu: float) -> float:
    """Smoothed Dirichlet sum sum_{f <= 3K} t(f) f^(-tau) exp(-(f/K)^mu)."""
    if mu <= 0:
        raise DomainError("mu must be positive")
    if K > 1.0 and mu < 2.0 * math.log(K) - 1e-12:
        raise DomainError("mu must be at least 2 log K")
    f_max = int(3.0 * K)
    if f_max >= 1 and (not rec.hecke or max(rec.hecke) < f_max):
        raise DatasetError(
            f"form {rec.index_j}: Hecke data up to {max(rec.hecke, default=0)} "
            f"cannot reach 3K = {f_max}"
        )
    total = 0.0
    for f in range(1, f_max + 1):
        w = _smooth_weight(float(f), K, mu)
        if w == 0.0:
            continue
        total += rec.hecke_value(f) * f ** (-tau) * w
    return total


def _afe_correction_integral(
    kappa: float, tau: float, mu: float, x: float, tol: float = 1e-10, full: bool = False
):
    """The contour-integral correction R^(1)(x) along the segment
    Re w = -1/mu, |Im w| <= mu^2, evaluated through log-gamma so the
    cosh(pi kappa) growth cancels against the gamma decay.  With dw = i dv
    the i of the prefactor 1/(pi i mu) cancels; conjugate symmetry of the
    integrand about v = 0 makes the result real."""
    log4pix = math.log(4.0 * math.pi * math.pi * x)
    pref = 1.0 / ((2.0 * math.pi) ** (2.0 * (1.0 - tau)) * math.pi * mu)

    def integrand(vs: np.ndarray) -> np.ndarray:
        out = np.empty(vs.shape, dtype=complex)
        for i, v in enumerate(vs):
            w = complex(-1.0 / mu, v)
            a = 1.0 - tau - w
            lg = log_gamma(complex(a.real, a.imag + kappa)) + log_gamma(
                complex(a.real, a.imag - kappa)
            )
            # log of cosh(pi kappa) - cos(pi (w + tau)), computed from the
            # four exponentials with the dominant one factored out so large
            # |Im w| neither overflows nor cancels
            exps = (
                math.pi * kappa,
                -math.pi * kappa,
                1j * math.pi * (w + tau),
                -1j * math.pi * (w + tau),
            )
            signs = (0.5, 0.5, -0.5, -0.5)
            m = max(e.real if isinstance(e, complex) else e for e in exps)
            total = 0.0 + 0.0j
            for sgn, e in zip(signs, exps):
                total += sgn * cmath.exp(e - m)
            log_bracket = m + cmath.log(total)
            gw = log_gamma(w / mu)
            out[i] = cmath.exp(w * log4pix + lg + log_bracket + gw)
        return out

    res = integrate_adaptive(integrand, -mu * mu, mu * mu, tol)
    if full:
        return pref * res.value
    return pref * res.value.real


def afe_correction(
    rec: MaassFormRecord, tau: float, K: float, mu: float, f: int
) -> float:
    """Correction term R^(1)(f K) of the approximate functional equation."""
    if not (0.5 < tau < 1.0):
        raise DomainError(f"tau = {tau} outside (1/2, 1)")
    if f < 1:
        raise DomainError("f must be a positive integer")
    if not (0.4 * K <= rec.kappa <= 2.5 * K):
        raise DomainError(
            f"K = {K} too far from kappa_j = {rec.kappa} for the uniform regime"
        )
    return _afe_correction_integral(rec.kappa, tau, mu, f * K)


def _afe_value(rec: MaassFormRecord, tau: float, K: float, mu: float) -> float:
    smoothed = hecke_series_smoothed(rec, tau, K, mu)
    correction = 0.0
    f_max = int(3.0 * K)
    for f in range(1, f_max + 1):
        # magnitude bound K^(1-2 tau) (4 pi^2 f / K)^(-mu/2) truncates the sum
        bound = K ** (1.0 - 2.0 * tau) * math.exp(
            -0.5 * mu * math.log(4.0 * math.pi * math.pi * f / K)
        ) if 4.0 * math.pi * math.pi * f / K > 1.0 else float("inf")
        if bound < 1e-16:
            break
        correction += (
            rec.hecke_value(f)
            * f ** (tau - 1.0)
            * _afe_correction_integral(rec.kappa, tau, mu, f * K)
        )
    return smoothed - correction


def hecke_value_afe(
    rec: MaassFormRecord, tau: float, K: float, C: float = 2.5
) -> float:
    """Hecke-series value H_j(tau) by the approximate functional equation:
    smoothed sum minus the weighted contour corrections.  Even parity only;
    needs Hecke data to 3K."""
    if rec.parity != 1:
        raise DomainError(
            f"form {rec.index_j} has odd parity; the functional-equation route "
            f"implemented here requires the even sign"
        )
    if not (0.5 < tau < 1.0):
        raise DomainError(f"tau = {tau} outside (1/2, 1)")
    if C < 2.0:
        raise DomainError("C must be at least 2")
    mu = C * math.log(K)
    return _afe_value(rec, tau, K, mu)


def _h_value(rec: MaassFormRecord, sigma: float) -> float:
    """Cached Hecke-series value if present, else the functional-equation
    route; refuses when neither applies."""
    for key, val in rec.cached_H.items():
        if abs(key - sigma) < 1e-12:
            return val
    if rec.parity == 1:
        return hecke_value_afe(rec, sigma, rec.kappa)
    raise DatasetError(
        f"form {rec.index_j}: no cached H({sigma}) and the AFE route needs even parity"
    )


# ----------------------------------------------------------------------
# Spectral sums
# ----------------------------------------------------------------------


def spectral_constant() -> float:
    """Absolute constant of the spectral prediction sum, inherited from the
    kernel calibration (pi/sqrt(2) from the stationary-phase prefactor times
    the calibrated residual constant); never fitted against the error term."""
    return math.pi / math.sqrt(2.0) * SADDLE_CALIBRATION


@dataclass
class SpectralSum:
    value: float
    coverage_fraction: float
    truncation_kappa: float
    n_terms: int
    y0_mode: str


def _y0_quarter_ratio(kappa: float, T: float) -> float:
    q = kappa / (4.0 * T)
    return (kappa / T) * (math.sqrt(1.0 + q * q) + kappa / (2.0 * T))


def spectral_sum_S(
    p: MomentParameters,
    ds: SpectralDataset,
    y0_mode: str = "quadratic",
) -> SpectralSum:
    """Leading spectral prediction for the integrated smoothed fourth moment:

      C T^(3/2-2s) sum_j alpha_j kappa_j^(2s-5/2) H_j^2(1/2) H_j(2s-1/2)
        exp(-G^2 log^2(1+Y0)/4) cos(kappa_j log(kappa_j/(4 e T)) + c3 kappa_j^3/T^2)

    truncated at kappa <= (T/G) log T.  ``y0_mode`` selects the saddle
    ordinate: "quadratic" solves the stationary-point equation, "quarter_ratio"
    keeps kappa/(4T) inside the root (two published forms of the saddle
    ordinate disagree; outputs carry the mode used).  The coverage
    fraction estimates how much of the exponential weight mass (against the
    kappa-density of the spectrum) the dataset reaches.
    """
    if y0_mode not in ("quadratic", "quarter_ratio"):
        raise DomainError(f"unknown y0_mode {y0_mode!r}")
    sigma, T, G = p.sigma, p.T, p.G
    kappa_cut = (T / G) * math.log(T)
    covered = [rec for rec in ds.up_to(kappa_cut)]
    total = 0.0
    for rec in covered:
        if rec.central_value == 0.0:
            continue
        y0 = (
            saddle_point(rec.kappa, T)
            if y0_mode == "quadratic"
            else _y0_quarter_ratio(rec.kappa, T)
        )
        damping = math.exp(-0.25 * (G * math.log1p(y0)) ** 2)
        if damping < 1e-300:
            continue
        h_val = _h_value(rec, 2.0 * sigma - 0.5)
        angle = rec.kappa * math.log(rec.kappa / (4.0 * math.e * T)) + C3 * rec.kappa**3 / (T * T)
        total += (
            rec.alpha
            * rec.kappa ** (2.0 * sigma - 2.5)
            * rec.central_value**2
            * h_val
            * damping
            * math.cos(angle)
        )
    value = spectral_constant() * T ** (1.5 - 2.0 * sigma) * total

    # weight-mass model for coverage: spectral density ~ kappa per unit
    # kappa against the Gaussian damping
    grid = np.linspace(0.0, kappa_cut, 2048)
    y0g = grid / T * (np.sqrt(1.0 + grid**2 / (4.0 * T * T)) + grid / (2.0 * T))
    w = grid * np.exp(-0.25 * (G * np.log1p(y0g)) ** 2)
    denom = float(np.trapezoid(w, grid))
    kappa_data = max((rec.kappa for rec in ds.records), default=0.0)
    mask = grid <= kappa_data
    numer = float(np.trapezoid(w[mask], grid[mask])) if mask.any() else 0.0
    coverage = numer / denom if denom > 0 else 0.0
    return SpectralSum(
        value=float(value),
        coverage_fraction=float(min(coverage, 1.0)),
        truncation_kappa=float(kappa_cut),
        n_terms=len(covered),
        y0_mode=y0_mode,
    )


def spectral_average_partial_sums(
    ds: SpectralDataset,
    tau: float,
    K: float,
    variant: str,
) -> tuple:
    """(lhs, rhs) of the spectral-average asymptotics.

    variant "HH2": sum alpha_j H_j(1/2) H_j^2(tau) against
    pi^(-2) zeta^2(tau+1/2) zeta(2 tau) K^2;
    variant "H2H": sum alpha_j H_j^2(1/2) H_j(tau) against
    2 pi^(-2) zeta^2(tau+1/2) K^2 log K.
    These are K -> infinity statements; at desk scale the ratio is reported,
    not asserted.
    """
    if variant not in ("HH2", "H2H"):
        raise DomainError(f"unknown variant {variant!r}; use 'HH2' or 'H2H'")
    if not (0.5 < tau < 1.0):
        raise DomainError(f"tau = {tau} outside (1/2, 1)")
    if ds.records and K > ds.records[-1].kappa * 1.0000001:
        raise DatasetError(
            f"dataset covers kappa <= {ds.records[-1].kappa}, requested K = {K}"
        )
    lhs = 0.0
    for rec in ds.up_to(K):
        if rec.central_value == 0.0:
            continue
        h_tau = _h_value(rec, tau)
        if variant == "HH2":
            lhs += rec.alpha * rec.central_value * h_tau * h_tau
        else:
            lhs += rec.alpha * rec.central_value**2 * h_tau
    z_half = zeta(complex(tau + 0.5, 0.0), DEFAULT_ZETA_CONFIG).real
    if variant == "HH2":
        z2t = zeta(complex(2.0 * tau, 0.0), DEFAULT_ZETA_CONFIG).real
        rhs = z_half * z_half * z2t * K * K / (math.pi**2)
    else:
        rhs = 2.0 * z_half * z_half * K * K * math.log(K) / (math.pi**2)
    return lhs, rhs


def kappa_class_sums(
    ds: SpectralDataset, sigma: float, kappa: float
) -> tuple:
    """(L_sigma(kappa), N_sigma(kappa)): sums over forms with kappa_j equal
    to kappa (within 1e-9, handling multiplicity); empty class gives zeros."""
    l_sum = 0.0
    n_sum = 0.0
    for rec in ds.records:
        if abs(rec.kappa - kappa) < 1e-9:
            if rec.central_value == 0.0:
                continue  # both products vanish with the central value
            h_sig = _h_value(rec, sigma)
            l_sum += rec.alpha * rec.central_value**2 * h_sig
            n_sum += rec.alpha * rec.central_value * h_sig * h_sig
    return l_sum, n_sum
