"""Batch command-line front end.

Commands: ``moment``, ``error-term``, ``lambda-compare``, ``spectral``,
``plot``, ``fit``.  Configuration comes from an optional flat key=value file
plus command-line overrides; every run writes its resolved configuration
next to its outputs.  Numeric tables are comma-separated with a header row,
"." decimal point and LF endings; reruns with the same configuration are
byte-identical.  Exit codes: 0 success, 2 configuration/input error,
3 numeric failure.  Warnings go to stderr as one machine-readable
key=value line each.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .core_numerics import DomainError, NumericsError
from .zeta_engine import sharp_fourth_moment_prefix
from .lambda_kernel import (
    GaussianWeight,
    lambda_direct,
    lambda_saddle,
    saddle_regime_threshold,
)
from .moment_lab import (
    MomentParameters,
    SecondaryCoefficients,
    fit_secondary_coefficients,
    growth_exponent,
    main_term,
    main_term_threequarters,
    sign_change_scan,
    weighted_moment_I2,
)
from .spectral_data import (
    DatasetError,
    kappa_class_sums,
    load_spectral_dataset,
    spectral_sum_S,
    spectral_average_partial_sums,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TABLE_HEADER = "T,sigma,G,sharp_moment,main_term,E2,spectral_prediction"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def _warn(**kv) -> None:
    print(" ".join(f"{k}={v}" for k, v in kv.items()), file=sys.stderr)


def _load_config_file(path: str) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Apply config-file values underneath explicit command-line flags."""
    if not getattr(args, "config", None):
        return args
    file_values = _load_config_file(args.config)
    sentinel = parser.parse_args([args.command])
    for key, raw in file_values.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(args, key)
        default = getattr(sentinel, key, None)
        if current == default:
            anno = type(default) if default is not None else str
            if anno is bool:
                setattr(args, key, raw.lower() in ("1", "true", "yes"))
            elif default is None:
                setattr(args, key, raw)
            else:
                setattr(args, key, anno(raw))
    return args


def _write_resolved_config(args: argparse.Namespace, out_path: Path) -> None:
    skip = {"command", "func"}
    lines = [
        f"{key}={getattr(args, key)}"
        for key in sorted(vars(args))
        if key not in skip and not key.startswith("_")
    ]
    out_path.with_suffix(out_path.suffix + ".config.txt").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )


def _g_for(args, T: float) -> float:
    if args.g is not None:
        return float(args.g)
    theta = float(args.g_exp)
    if not (1.0 / 3.0 <= theta <= 0.99):
        raise ValueError(f"--g-exp {theta} outside [1/3, 0.99]")
    return T**theta


def _t_grid(args) -> np.ndarray:
    lo, hi, step = float(args.t_from), float(args.t_to), float(args.t_step)
    if lo > hi or step <= 0:
        raise ValueError("need t-from <= t-to and positive t-step")
    if lo == hi:
        return np.asarray([], dtype=float)
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _read_table(path: str) -> dict:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError(f"empty table {path}")
    header = rows[0].split(",")
    cols: dict = {name: [] for name in header}
    for row in rows[1:]:
        cells = row.split(",")
        for name, cell in zip(header, cells):
            cols[name].append(float(cell) if cell else math.nan)
    return {name: np.asarray(vals) for name, vals in cols.items()}


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------


def cmd_moment(args) -> int:
    grid = _t_grid(args)
    out = Path(args.out)
    coeffs = None
    if args.coeffs:
        kv = _load_config_file(args.coeffs)
        coeffs = SecondaryCoefficients(
            a0=float(kv["a0"]),
            a1=float(kv["a1"]),
            a2=float(kv["a2"]),
            fit_window=(float(kv.get("window_lo", 0)), float(kv.get("window_hi", 0))),
            fit_residual=float(kv.get("residual", 0.0)),
        )
    lines = [TABLE_HEADER]
    if grid.size:
        prefix = sharp_fourth_moment_prefix(args.sigma, grid, args.tol)
        for T, sharp in zip(grid, prefix):
            g_val = _g_for(args, T)
            main = e2 = None
            if coeffs is not None:
                main = main_term(T, args.sigma, coeffs)
                e2 = sharp - main
            lines.append(
                ",".join(
                    [_fmt(T), _fmt(args.sigma), _fmt(g_val), _fmt(sharp), _fmt(main), _fmt(e2), ""]
                )
            )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_resolved_config(args, out)
    return EXIT_OK


def cmd_error_term(args) -> int:
    out = Path(args.out)
    sigma = float(args.sigma)
    if args.table:
        table = _read_table(args.table)
        grid = table["T"]
        sharp = table["sharp_moment"]
    else:
        grid = _t_grid(args)
        if grid.size == 0:
            out.write_text(TABLE_HEADER + "\n", encoding="utf-8")
            _write_resolved_config(args, out)
            return EXIT_OK
        sharp = sharp_fourth_moment_prefix(sigma, grid, args.tol)

    threequarters = abs(sigma - 0.75) < 1e-3
    if threequarters:
        z32_t = np.asarray([main_term_threequarters(t, (0.0, 0.0, 0.0)) for t in grid])
        resid = sharp - z32_t
        logs = np.log(grid)
        design = np.column_stack([np.sqrt(grid), np.sqrt(grid) * logs, np.sqrt(grid) * logs**2])
        coef, _, _, _ = np.linalg.lstsq(design, resid, rcond=None)
        mains = z32_t + design @ coef
        coeff_obj = SecondaryCoefficients(
            a0=float(coef[0]),
            a1=float(coef[1]),
            a2=float(coef[2]),
            fit_window=(float(grid.min()), float(grid.max())),
            fit_residual=float(np.sqrt(np.mean((sharp - mains) ** 2))),
        )
    else:
        coeff_obj = fit_secondary_coefficients(list(zip(grid, sharp)), sigma)
        mains = np.asarray([main_term(t, sigma, coeff_obj) for t in grid])
    e2 = sharp - mains

    lines = [TABLE_HEADER]
    for T, s_val, m_val, e_val in zip(grid, sharp, mains, e2):
        lines.append(
            ",".join(
                [_fmt(T), _fmt(sigma), _fmt(_g_for(args, T)), _fmt(s_val), _fmt(m_val), _fmt(e_val), ""]
            )
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    summary = [
        f"a0={coeff_obj.a0!r}",
        f"a1={coeff_obj.a1!r}",
        f"a2={coeff_obj.a2!r}",
        f"window_lo={coeff_obj.fit_window[0]!r}",
        f"window_hi={coeff_obj.fit_window[1]!r}",
        f"residual={coeff_obj.fit_residual!r}",
        f"routed_threequarters={threequarters}",
    ]
    if grid.size >= 16 and grid.max() >= 4.0 * grid.min() and np.any(e2 != 0):
        slope, half = growth_exponent(list(zip(grid, e2)))
        summary.append(f"growth_exponent={slope!r}")
        summary.append(f"growth_exponent_halfwidth={half!r}")
    coeff_path = out.with_suffix(out.suffix + ".coeffs.txt")
    coeff_path.write_text("\n".join(summary) + "\n", encoding="utf-8")
    _write_resolved_config(args, out)
    return EXIT_OK


def cmd_lambda_compare(args) -> int:
    out = Path(args.out)
    T = float(args.t)
    w = GaussianWeight(center_T=T, width_G=_g_for(args, T))
    rs = [float(x) for x in args.r_grid.split(",") if x]
    lines = ["r,direct,saddle,rel_deviation,regime"]
    devs = []
    for r in rs:
        direct = lambda_direct(r, args.sigma, w, args.tol)
        if r < saddle_regime_threshold(T):
            bound = T ** (0.5 - 2.0 * args.sigma)
            _warn(warning="saddle_regime_fallback", r=r, bound=_fmt(bound))
            lines.append(
                ",".join([_fmt(r), _fmt(direct.value), "", _fmt(bound), "fallback"])
            )
            continue
        saddle = lambda_saddle(r, args.sigma, w)
        dev = abs(saddle.value - direct.value) / max(abs(direct.value), 1e-300)
        devs.append(dev)
        lines.append(
            ",".join([_fmt(r), _fmt(direct.value), _fmt(saddle.value), _fmt(dev), "saddle"])
        )
    if len(devs) >= 2:
        monotone = all(b <= a * 1.0000001 for a, b in zip(devs, devs[1:]))
        lines.append(f"# trend_monotone_nonincreasing={monotone}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_resolved_config(args, out)
    return EXIT_OK


def cmd_spectral(args) -> int:
    if not args.dataset:
        _warn(error="missing_dataset")
        return EXIT_CONFIG
    ds = load_spectral_dataset(args.dataset, n_max=args.n_max)
    out = Path(args.out)
    grid = _t_grid(args)
    lines = ["T,sigma,G,S,coverage_fraction,n_terms,y0_mode"]
    s_vals = []
    for T in grid:
        g_val = _g_for(args, T)
        res = spectral_sum_S(
            MomentParameters(sigma=args.sigma, T=T, G=g_val), ds, y0_mode=args.y0_mode
        )
        if res.coverage_fraction < 0.5:
            _warn(warning="coverage_shortfall", T=_fmt(T), coverage=_fmt(res.coverage_fraction))
        s_vals.append(res.value)
        lines.append(
            ",".join(
                [
                    _fmt(T),
                    _fmt(args.sigma),
                    _fmt(g_val),
                    _fmt(res.value),
                    _fmt(res.coverage_fraction),
                    str(res.n_terms),
                    res.y0_mode,
                ]
            )
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    # spectral-average ratio table over the dataset's eigenvalues
    t2_lines = ["K,variant,lhs,rhs,ratio"]
    kappas = [rec.kappa for rec in ds.records]
    for K in kappas:
        for variant in ("HH2", "H2H"):
            lhs, rhs = spectral_average_partial_sums(ds, args.sigma, K, variant)
            t2_lines.append(
                ",".join([_fmt(K), variant, _fmt(lhs), _fmt(rhs), _fmt(lhs / rhs)])
            )
    t2_lines.append(
        "# caveat: these are K->infinity asymptotics; desk-scale ratios are "
        "reported, not asserted"
    )
    out.with_suffix(out.suffix + ".averages.csv").write_text(
        "\n".join(t2_lines) + "\n", encoding="utf-8"
    )

    nonzero = sum(
        1 for rec in ds.records if kappa_class_sums(ds, args.sigma, rec.kappa)[0] != 0.0
    )
    _warn(
        info="nonvanishing_report",
        classes=len(ds.records),
        nonzero_L=nonzero,
        fraction=_fmt(nonzero / len(ds.records)) if len(ds.records) else "",
    )

    if args.e2_table:
        table = _read_table(args.e2_table)
        e2 = table["E2"]
        ts = table["T"]
        common = min(len(e2), len(s_vals))
        if common >= 3:
            a = e2[:common] - np.mean(e2[:common])
            b = np.asarray(s_vals[:common]) - np.mean(s_vals[:common])
            denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
            corr = float(np.dot(a, b)) / denom if denom > 0 else math.nan
            _warn(info="e2_correlation", n=common, pearson=_fmt(corr))
    _write_resolved_config(args, out)
    return EXIT_OK


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    table = _read_table(args.table)
    x = table[args.x]
    y = table[args.y]
    fig, ax = plt.subplots(figsize=(8, 5))
    finite = np.isfinite(x) & np.isfinite(y)
    if args.kind == "series":
        ax.plot(x[finite], y[finite], lw=0.8)
        ax.axhline(0.0, color="grey", lw=0.5)
    elif args.kind == "loglog":
        mask = finite & (x > 0) & (y != 0)
        running = np.maximum.accumulate(np.abs(y[mask]))
        ax.loglog(x[mask], running, lw=0.8)
        if mask.sum() >= 16 and x[mask].max() >= 4 * x[mask].min():
            slope, half = growth_exponent(list(zip(x[mask], y[mask])))
            ax.set_title(f"running max; slope {slope:.3f} +- {half:.3f}")
    else:
        ax.scatter(x[finite], y[finite], s=6)
    ax.set_xlabel(args.x)
    ax.set_ylabel(args.y)
    fig.savefig(args.out, format=args.out.rsplit(".", 1)[-1])
    plt.close(fig)
    return EXIT_OK


def cmd_fit(args) -> int:
    table = _read_table(args.table)
    samples = list(zip(table["T"], table["sharp_moment"]))
    coeffs = fit_secondary_coefficients(samples, args.sigma)
    lines = [
        f"a0={coeffs.a0!r}",
        f"a1={coeffs.a1!r}",
        f"a2={coeffs.a2!r}",
        f"window_lo={coeffs.fit_window[0]!r}",
        f"window_hi={coeffs.fit_window[1]!r}",
        f"residual={coeffs.fit_residual!r}",
        f"stderr_a0={coeffs.std_errors[0]!r}",
        f"stderr_a1={coeffs.std_errors[1]!r}",
        f"stderr_a2={coeffs.std_errors[2]!r}",
    ]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_resolved_config(args, Path(args.out))
    return EXIT_OK


# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offcrit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_grid=True):
        p.add_argument("--sigma", type=float, default=0.6)
        if needs_grid:
            p.add_argument("--t-from", dest="t_from", type=float, default=100.0)
            p.add_argument("--t-to", dest="t_to", type=float, default=200.0)
            p.add_argument("--t-step", dest="t_step", type=float, default=10.0)
        p.add_argument("--g", type=float, default=None)
        p.add_argument("--g-exp", dest="g_exp", type=float, default=0.6)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--dataset", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("moment", help="sharp fourth moments over a T-grid")
    common(p)
    p.add_argument("--coeffs", type=str, default=None)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("error-term", help="error-term series and coefficient fit")
    common(p)
    p.add_argument("--table", type=str, default=None, help="existing moment table")
    p.set_defaults(func=cmd_error_term)

    p = sub.add_parser("lambda-compare", help="direct vs saddle kernel values")
    common(p, needs_grid=False)
    p.add_argument("--t", type=float, default=1e4)
    p.add_argument("--r-grid", dest="r_grid", type=str, default="20,40,80,160")
    p.set_defaults(func=cmd_lambda_compare)

    p = sub.add_parser("spectral", help="spectral prediction and average tables")
    common(p)
    p.add_argument("--n-max", dest="n_max", type=int, default=80)
    p.add_argument("--y0-mode", dest="y0_mode", type=str, default="quadratic")
    p.add_argument("--e2-table", dest="e2_table", type=str, default=None)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("plot", help="static plot of a table")
    p.add_argument("--table", type=str, default=None)
    p.add_argument("--kind", type=str, choices=("series", "loglog", "scatter"), default="series")
    p.add_argument("--x", type=str, default="T")
    p.add_argument("--y", type=str, default="E2")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("fit", help="fit secondary coefficients from a moment table")
    p.add_argument("--table", type=str, default=None)
    p.add_argument("--sigma", type=float, default=0.6)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args, parser)
    except (ValueError, OSError) as exc:
        _warn(error="config", detail=str(exc).replace(" ", "_"))
        return EXIT_CONFIG
    if getattr(args, "out", None) is None:
        _warn(error="config", detail="missing_required_--out")
        return EXIT_CONFIG
    if args.command in ("plot", "fit") and getattr(args, "table", None) is None:
        _warn(error="config", detail="missing_required_--table")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ValueError, OSError, DatasetError, DomainError) as exc:
        _warn(error="input", detail=str(exc).replace(" ", "_"))
        return EXIT_CONFIG
    except NumericsError as exc:
        _warn(error="numeric", detail=str(exc).replace(" ", "_"))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
