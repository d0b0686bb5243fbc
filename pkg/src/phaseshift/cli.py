"""
Command-line driver.

    phaseshift compare      [--config FILE] [--set key=value ...] [--degrees]
    phaseshift wavefunction [--config FILE] [--set key=value ...]
    phaseshift validate     [--config FILE] [--set key=value ...]

``compare`` sweeps one parameter and tabulates the phase shift from every
requested method.  Method columns:

    unitary1, green1     first-order phase
    unitary2, green2     first plus second order
    exact                exact s-wave square-well phase (well/barrier, l = 0)
    numerov              direct integration plus asymptotic fit
    wronskian            sin(delta) from the first-order wavefunction

For the square well at ``l = 0`` the closed-form first- and second-order
reference columns are added.  All pairwise method differences and their
largest magnitude follow.  Output is CSV with ``#`` header lines (or JSON),
numbers written with 17 significant digits, and is byte-identical between
runs of the same configuration.

Exit status: 0 on success, 1 if ``validate`` finds a failing invariant,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from itertools import combinations

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__, green, unitary
from .asymptotics import (
    default_window,
    numerov_solve,
    reduce_phase,
    uniform_grid,
    wronskian_sin_delta,
)
from .config import ConfigError, RunConfig, load_config
from .exact_well import exact_phase_shift_s
from .params import ScatteringParams
from .potential import make_model
from .specfun import SQRT_2_OVER_PI, free_regular, sinc
from .validation import run_checks

WAVE_METHODS = ("unitary1", "green1", "green2", "numerov")


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.17g}"


def _model(cfg: RunConfig, lam: float):
    return make_model(cfg.kind, R=cfg.R, lam=lam, width=cfg.width)


def _has_reference(cfg: RunConfig) -> bool:
    return cfg.kind in ("well", "barrier") and cfg.l == 0


def _plain(d: dict) -> dict:
    """Keep the JSON-friendly scalar entries of a diagnostics dict."""
    out = {}
    for k, v in d.items():
        if isinstance(v, (bool, str)):
            out[k] = v
        elif isinstance(v, (int, float, np.floating, np.integer)):
            out[k] = float(v) if math.isfinite(v) else None
    return out


def method_result(method: str, cfg: RunConfig, p: float, lam: float) -> tuple[float, dict]:
    """Phase shift of one method at one sweep point, with its diagnostics."""
    if lam == 0 or cfg.kind == "zero":
        # the free problem has no phase shift
        return 0.0, {"free": True}
    model = _model(cfg, lam)
    l, m = cfg.l, cfg.m
    if method == "unitary1":
        r = unitary.delta1(model, l, p, m)
        return r.value, {"error_estimate": r.error_estimate, **_plain(r.diagnostics)}
    if method == "unitary2":
        r1 = unitary.delta1(model, l, p, m)
        r2 = unitary.delta2(model, l, p, m, None, cfg.quad)
        return r1.value + r2.value, {"delta1": r1.value, "delta2": r2.value,
                                     "error_estimate": r1.error_estimate + r2.error_estimate,
                                     **_plain(r2.diagnostics)}
    if method in ("green1", "green2"):
        r1 = green.first_order_phase(model, l, p, m)
        diag = {"delta1": r1.value, **_plain(r1.diagnostics)}
        if method == "green1":
            return r1.value, diag
        r2 = green.second_order_phase(model, l, p, m)
        diag.update(delta2=r2.value, **_plain(r2.diagnostics))
        return r1.value + r2.value, diag
    if method == "exact":
        if cfg.kind not in ("well", "barrier"):
            raise ValueError("exact solution exists for the square well only")
        sol = exact_phase_shift_s(ScatteringParams(m, cfg.R, lam, l, p))
        return sol.delta0, {"A0": sol.A0, "B0": sol.B0, "evanescent": bool(sol.evanescent)}
    if method == "numerov":
        win = default_window(p, model.r_max)
        grid = uniform_grid(p, win[1], model.breakpoints, cfg.hp)
        wf = numerov_solve(model, l, p, m, grid, win)
        fit = wf.meta["fit"]
        return reduce_phase(wf.meta["phase"]), {
            "h": float(wf.meta["h"]), "fit_A": fit.A, "fit_B": fit.B,
            "fit_window": list(fit.window), "fit_relative_residual": fit.relative_residual,
            "fit_points": fit.n_points}
    if method == "wronskian":
        wf = unitary.first_order_wavefunction(model, l, p, m, None, None, cfg.quad)
        return wronskian_sin_delta(wf, model, l, p, m), {"quantity": "sin(delta)",
                                                         **_plain(wf.pv_diagnostics)}
    raise ValueError(f"unknown method {method!r}")


def method_value(method: str, cfg: RunConfig, p: float, lam: float) -> float:
    """Phase shift of one method at one sweep point."""
    return method_result(method, cfg, p, lam)[0]


def compare_table(cfg: RunConfig):
    """Rows of the comparison sweep plus failure messages."""
    methods = list(cfg.methods)
    pairs = list(combinations(methods, 2))
    ref = _has_reference(cfg)
    columns = ["kappa", "eta", "p", "lambda"] + [f"delta_{s}" for s in methods]
    if ref:
        columns += ["ref_first_order", "ref_second_order"]
    columns += [f"diff_{a}_{b}" for a, b in pairs]
    if pairs:
        columns.append("max_abs_diff")
    angle_cols = {c for c in columns if c.startswith(("delta_", "ref_", "diff_", "max_abs"))}

    rows, failures, diagnostics = [], [], []
    for i, (p, lam) in enumerate(cfg.points()):
        kappa = p * cfg.R
        eta = lam * cfg.m / p
        vals, diag = {}, {}
        for s in methods:
            try:
                v, d = method_result(s, cfg, p, lam)
                vals[s], diag[s] = float(v), d
            except Exception as exc:  # noqa: BLE001 - recorded per row
                vals[s] = math.nan
                diag[s] = {"error": f"{type(exc).__name__}: {exc}"}
                failures.append(f"row {i}: {s} failed: {type(exc).__name__}: {exc}")
        diagnostics.append(diag)
        row = [kappa, eta, p, lam] + [vals[s] for s in methods]
        if ref:
            row += [-eta * (1.0 - sinc(2 * kappa)),
                    -eta * (1.0 - sinc(2 * kappa))
                    - eta**2 * (1 + 2 * math.cos(2 * kappa)) / (2 * kappa)]
        diffs = [vals[a] - vals[b] for a, b in pairs]
        row += diffs
        if pairs:
            finite = [abs(d) for d in diffs if math.isfinite(d)]
            row.append(max(finite) if len(finite) == len(diffs) else math.nan)
        rows.append(row)

    if cfg.degrees:
        idx = [j for j, c in enumerate(columns) if c in angle_cols]
        rows = [[math.degrees(v) if j in idx else v for j, v in enumerate(r)] for r in rows]
    return columns, rows, failures, diagnostics


def wavefunction_table(cfg: RunConfig):
    """Radial samples of the free solution and each requested wavefunction."""
    if cfg.count != 1:
        raise ConfigError("wavefunction needs a single parameter point (sweep.count = 1)")
    bad = [s for s in cfg.methods if s not in WAVE_METHODS]
    if bad:
        raise ConfigError(f"methods {bad} have no wavefunction (choose from "
                          f"{', '.join(WAVE_METHODS)})")
    p, lam = next(cfg.points())
    model = _model(cfg, lam)
    l, m = cfg.l, cfg.m
    win = default_window(p, model.r_max)
    r_max = cfg.r_max if cfg.r_max is not None else win[1]
    h_max = math.pi / (8.5 * p)
    n = cfg.r_count if cfg.r_count is not None else int(math.ceil(r_max / h_max)) + 1
    r = np.linspace(0.0, r_max, n)

    cols = {"r": r, "y_free": free_regular(l, p, r)}
    failures = []
    for s in cfg.methods:
        try:
            if s == "unitary1":
                y = unitary.first_order_wavefunction(model, l, p, m, None, None,
                                                     cfg.quad)(r)
            elif s in ("green1", "green2"):
                it = green.free_iterate(model, l, p, m)
                for _ in range(int(s[-1])):
                    it = green.iterate(model, l, p, m, it)
                y = it(r)
            else:
                grid = uniform_grid(p, max(r_max, win[1]), model.breakpoints, cfg.hp)
                wf = numerov_solve(model, l, p, m, grid, win)
                y = CubicSpline(wf.grid, wf.samples)(r)
            cols[f"y_{s}"] = np.asarray(y, dtype=float)
        except Exception as exc:  # noqa: BLE001
            cols[f"y_{s}"] = np.full_like(r, math.nan)
            failures.append(f"{s} failed: {type(exc).__name__}: {exc}")
    columns = list(cols)
    rows = np.column_stack([cols[c] for c in columns]).tolist()
    meta = {"kappa": p * cfg.R, "eta": lam * m / p, "p": p, "lambda": lam,
            "amplitude": SQRT_2_OVER_PI}
    return columns, rows, failures, meta


def _header(cfg: RunConfig, command: str) -> list[str]:
    lines = [f"phaseshift {__version__} {command}", f"config_sha256: {cfg.sha256}"]
    lines += [f"config: {k}={cfg.raw[k]}" for k in sorted(cfg.raw)]
    return lines


def render(cfg: RunConfig, command: str, columns, rows, failures, extra=None,
           diagnostics=None) -> str:
    """CSV text (or JSON, which also carries per-row method diagnostics)."""
    if cfg.fmt == "json":
        doc = {
            "tool": "phaseshift",
            "version": __version__,
            "command": command,
            "config": {k: cfg.raw[k] for k in sorted(cfg.raw)},
            "config_sha256": cfg.sha256,
            "columns": columns,
            "rows": [[v if isinstance(v, str) or math.isfinite(v) else None for v in r]
                     for r in rows],
            "failures": failures,
        }
        if extra:
            doc["meta"] = extra
        if diagnostics is not None:
            doc["diagnostics"] = diagnostics
        return json.dumps(doc, indent=1) + "\n"
    out = [f"# {s}" for s in _header(cfg, command)]
    if extra:
        out += [f"# {k}: {_fmt(v)}" for k, v in extra.items()]
    out.append("# columns: " + ",".join(columns))
    for r in rows:
        out.append(",".join(v if isinstance(v, str) else _fmt(v) for v in r))
    out += [f"# failure: {f}" for f in failures]
    return "\n".join(out) + "\n"


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.path == "-":
        stdout.write(text)
    else:
        with open(cfg.path, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phaseshift",
                                 description="Partial-wave phase shifts by several methods.")
    ap.add_argument("--version", action="version", version=f"phaseshift {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("compare", "sweep a parameter and compare methods"),
                           ("wavefunction", "dump radial wavefunctions at one point"),
                           ("validate", "run the invariant census")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
        sp.add_argument("--degrees", action="store_true", help="report angles in degrees")
        sp.add_argument("--output", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format")
    return ap


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.degrees:
        overrides.append("output.degrees=true")
    if args.output:
        overrides.append(f"output.path={args.output}")
    if args.format:
        overrides.append(f"output.format={args.format}")
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "compare":
            columns, rows, failures, diags = compare_table(cfg)
            _emit(cfg, render(cfg, "compare", columns, rows, failures, None, diags), stdout)
            return 0
        if args.command == "wavefunction":
            columns, rows, failures, meta = wavefunction_table(cfg)
            _emit(cfg, render(cfg, "wavefunction", columns, rows, failures, meta), stdout)
            return 0
    except ConfigError as exc:
        print(f"phaseshift: configuration error: {exc}", file=sys.stderr)
        return 2

    results = run_checks(cfg.tolerance_scale, cfg.inject)
    rows = [[c.name, c.residual, c.threshold, "PASS" if c.passed else "FAIL"] for c in results]
    failures = [f"{c.name}: {c.detail}" for c in results if c.detail]
    _emit(cfg, render(cfg, "validate", ["check", "residual", "threshold", "status"], rows,
                      failures), stdout)
    return 0 if all(c.passed for c in results) else 1


if __name__ == "__main__":
    sys.exit(main())
