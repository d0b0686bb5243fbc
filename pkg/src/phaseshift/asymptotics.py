"""
Phase extraction from radial wavefunctions and the Numerov ODE oracle.

Outside the potential a solution of the radial equation is a combination of
the free pair, and

    y(r) = sqrt(2/pi) * [A s_l(pr) + B c_l(pr)],

where ``s_l(x) = x j_l(x)`` and ``c_l(x) = -x n_l(x)`` behave like
``sin(x - l pi/2)`` and ``cos(x - l pi/2)``.  The phase shift is
``atan2(B, A)``.  Fitting against the exact pair rather than its large-``r``
limit removes the ``O(1/(pr))`` bias for ``l > 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .potential import PotentialModel
from .quadrature import PanelRule
from .specfun import SQRT_2_OVER_PI, free_irregular, free_regular


class AsymptoticFitError(ValueError):
    """The least-squares fit fails the validity gate."""


FIT_GATE = 1e-3


@dataclass
class RadialWavefunction:
    """Reduced radial wavefunction sampled on a grid starting at ``r = 0``.

    ``support`` is the radius beyond which the potential vanishes (or is
    negligible); fits are only taken outside it.
    """

    grid: np.ndarray
    samples: np.ndarray
    p: float
    l: int = 0
    support: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.samples.shape:
            raise ValueError("grid and samples must be 1-D arrays of equal length")
        if self.grid.size < 2 or self.grid[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        steps = np.diff(self.grid)
        if np.any(steps <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if self.samples[0] != 0.0:
            raise ValueError("reduced wavefunction must vanish at r = 0")
        if steps.max() >= math.pi / (8.0 * self.p):
            raise ValueError(
                f"grid step {steps.max():.3g} does not resolve the oscillation "
                f"(need < pi/(8p) = {math.pi / (8 * self.p):.3g})"
            )

    def scaled(self, c: float) -> "RadialWavefunction":
        return RadialWavefunction(self.grid, c * self.samples, self.p, self.l,
                                  self.support, dict(self.meta))


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares coefficients of the free pair over ``window``."""

    A: float
    B: float
    window: tuple[float, float]
    residual: float
    relative_residual: float
    n_points: int

    @property
    def phase(self) -> float:
        return math.atan2(self.B, self.A)

    @property
    def amplitude(self) -> float:
        return math.hypot(self.A, self.B)


def reduce_phase(delta: float) -> float:
    """Map an angle into ``(-pi/2, pi/2]`` (phase shifts are defined mod pi)."""
    d = math.fmod(delta + math.pi / 2, math.pi)
    if d <= 0:
        d += math.pi
    return d - math.pi / 2


def default_window(p: float, support: float) -> tuple[float, float]:
    """``[max(2 R, 20/p), max(2 R, 20/p) + 8 pi / p]``."""
    lo = max(2.0 * support, 20.0 / p)
    return lo, lo + 8.0 * math.pi / p


def free_pair(l: int, p: float, r):
    """``(s_l(pr), c_l(pr))``, the fit basis without the ``sqrt(2/pi)``."""
    return free_regular(l, p, r) / SQRT_2_OVER_PI, -free_irregular(l, p, r) / SQRT_2_OVER_PI


def fit_sin_cos(wf: RadialWavefunction, window: tuple[float, float] | None = None,
                gate: float = FIT_GATE) -> AsymptoticFit:
    """Least-squares fit of ``wf`` to the free pair over ``window``.

    Raises
    ------
    AsymptoticFitError
        If the window lies inside the potential, covers fewer than four
        periods, or the relative misfit exceeds ``gate``.
    """
    if window is None:
        window = default_window(wf.p, wf.support)
    lo, hi = map(float, window)
    if lo < wf.support:
        raise AsymptoticFitError(
            f"fit window starts at {lo:g}, inside the potential support {wf.support:g}"
        )
    periods = (hi - lo) * wf.p / (2.0 * math.pi)
    if periods < 4.0 - 1e-9:
        raise AsymptoticFitError(f"fit window spans {periods:.2f} periods; need at least 4")
    sel = (wf.grid >= lo) & (wf.grid <= hi)
    n = int(sel.sum())
    if n < 8 or wf.grid[-1] < hi * (1 - 1e-12):
        raise AsymptoticFitError(
            f"wavefunction grid (up to r = {wf.grid[-1]:g}) does not cover the fit window "
            f"[{lo:g}, {hi:g}]"
        )
    r = wf.grid[sel]
    y = wf.samples[sel]
    s, c = free_pair(wf.l, wf.p, r)
    basis = SQRT_2_OVER_PI * np.column_stack([s, c])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    A, B = float(coef[0]), float(coef[1])
    rms = float(np.sqrt(np.mean((basis @ coef - y) ** 2)))
    amp = SQRT_2_OVER_PI * math.hypot(A, B)
    rel = rms / amp if amp > 0 else math.inf
    fit = AsymptoticFit(A, B, (lo, hi), rms, rel, n)
    if not rel <= gate:
        raise AsymptoticFitError(
            f"fit residual {rel:.2e} (relative) exceeds the gate {gate:.0e}; "
            "the window is probably inside the interaction region"
        )
    return fit


def _radial_rule(model: PotentialModel, p: float) -> PanelRule:
    model.check_admissible()
    r_max = model.r_max
    bps = tuple(b for b in model.breakpoints if 0 < b < r_max)
    return PanelRule.covering(0.0, r_max, min(r_max, math.pi / max(p, 1e-12)),
                              breakpoints=bps, n_nodes=24)


def wronskian_sin_delta(y_i, model: PotentialModel, l: int, p: float, m: float) -> float:
    """``sin(delta) = -(pi m / p) int dr y_i V ybar_l(r, p)``.

    ``y_i`` must be normalized to asymptotic amplitude ``sqrt(2/pi)``.  It is
    either a callable ``r -> y`` (integrated with a composite Gauss rule
    split at the potential's breakpoints) or a :class:`RadialWavefunction`
    (composite Simpson on its samples; breakpoints should be grid nodes).
    """
    model.check_admissible()
    if callable(y_i):
        rule = _radial_rule(model, p)
        r = rule.nodes
        integral = rule.integrate(np.asarray(y_i(r)) * model.evaluate(r) * free_regular(l, p, r))
    else:
        r_max = model.r_max
        grid = y_i.grid
        if grid[-1] < r_max * (1 - 1e-12):
            raise ValueError(f"wavefunction grid ends at {grid[-1]:g} < potential support {r_max:g}")
        for b in model.breakpoints:
            if 0 < b < grid[-1] and np.min(np.abs(grid - b)) > 1e-9 * max(b, 1.0):
                warnings.warn(f"breakpoint r = {b:g} is not a grid node; Simpson loses accuracy",
                              stacklevel=2)
        sel = grid <= r_max * (1 + 1e-12)
        r = grid[sel]
        integral = simpson(y_i.samples[sel] * model.evaluate(r) * free_regular(l, p, r), x=r)
    return float(-(math.pi * m / p) * integral)


def uniform_grid(p: float, r_end: float, breakpoints=(), hp: float = 0.004) -> np.ndarray:
    """Uniform grid from 0 past ``r_end`` with step ``<= hp / p``.

    A single breakpoint is made an exact grid node.
    """
    h = min(hp, math.pi / 8.5) / p
    bps = [b for b in breakpoints if 0 < b < r_end]
    if bps:
        b = bps[0]
        n = math.ceil(b / h)
        h = b / n
    n_total = math.ceil(r_end / h - 1e-9)
    return h * np.arange(n_total + 1)


def numerov_solve(model: PotentialModel, l: int, p: float, m: float, r_grid,
                  window: tuple[float, float] | None = None) -> RadialWavefunction:
    """Integrate ``y'' = [l(l+1)/r^2 + 2 m V(r) - p^2] y`` by Numerov's method.

    The grid must be uniform and start at 0.  The recursion is seeded with
    ``y(0) = 0`` and the Frobenius series ``y(h) = h^(l+1) [1 + a h^2]``.  At a
    grid node where ``V`` jumps, the average of the one-sided values is used
    together with the ``O(h^3)`` jump correction, which keeps the method fourth
    order.  If the grid covers the fit window the solution is rescaled to
    amplitude ``sqrt(2/pi)`` with ``A >= 0``; the fit is stored in ``meta``.
    """
    model.check_admissible()
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size < 3 or r[0] != 0.0:
        raise ValueError("Numerov grid must be 1-D, start at 0 and have >= 3 nodes")
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-9, atol=0.0):
        raise ValueError("Numerov grid must be uniform")
    if h * p >= math.pi / 8:
        raise ValueError(f"step h = {h:g} too coarse for p = {p:g} (need h p < pi/8)")

    with np.errstate(divide="ignore"):
        f = np.where(r > 0, l * (l + 1) / np.where(r > 0, r, 1.0) ** 2, 0.0) \
            + 2.0 * m * model.evaluate(r) - p * p
    jump = np.zeros_like(r)
    f_minus = f.copy()
    for b in model.breakpoints:
        idx = int(np.argmin(np.abs(r - b)))
        if abs(r[idx] - b) > 1e-9 * max(b, 1.0):
            if b < r[-1]:
                warnings.warn(f"potential breakpoint r = {b:g} is not a grid node; "
                              "Numerov drops to second order", stacklevel=2)
            continue
        fl = l * (l + 1) / b**2 - p * p
        f_minus[idx] = fl + 2.0 * m * float(model.evaluate(b * (1 - 1e-12)))
        f_plus = fl + 2.0 * m * float(model.evaluate(b * (1 + 1e-12)))
        f[idx] = 0.5 * (f_minus[idx] + f_plus)
        jump[idx] = f_plus - f_minus[idx]

    h2 = h * h / 12.0
    # a jump node enters the stencils of its neighbours with the one-sided
    # value of f seen from that neighbour's side
    c_left = (1.0 - h2 * f_minus).tolist()
    c_right = (1.0 - h2 * (f_minus + jump)).tolist()
    d = (2.0 + 10.0 * h2 * f).tolist()
    jl = jump.tolist()
    fm = f_minus.tolist()
    n = r.size
    y = [0.0] * n
    v0 = float(model.evaluate(0.0)) if model.origin_exponent == 0 else 0.0
    a = (2.0 * m * v0 - p * p) / (2.0 * (2 * l + 3))
    y[1] = h ** (l + 1) * (1.0 + a * h * h)
    h3 = h**3 / 12.0
    for i in range(1, n - 1):
        # c_{i-1} y_{i-1} vanishes at i = 1 since y_0 = 0 (f_0 may be infinite)
        prev = c_right[i - 1] * y[i - 1] if i > 1 else 0.0
        rhs = d[i] * y[i] - prev
        if jl[i] != 0.0:
            dy = (y[i] - y[i - 1]) / h + 0.5 * h * fm[i] * y[i]
            rhs += h3 * jl[i] * dy
        y[i + 1] = rhs / c_left[i + 1]
    samples = np.asarray(y)

    support = model.r_max
    wf = RadialWavefunction(r, samples, p, l, support, {"method": "numerov", "h": h})
    win = window if window is not None else default_window(p, support)
    if r[-1] >= win[1] * (1 - 1e-12):
        fit = fit_sin_cos(wf, win)
        scale = 1.0 / fit.amplitude
        if fit.A < 0 or (fit.A == 0 and fit.B < 0):
            scale = -scale
        wf = wf.scaled(scale)
        fit = AsymptoticFit(scale * fit.A, scale * fit.B, fit.window,
                            abs(scale) * fit.residual, fit.relative_residual, fit.n_points)
        wf.meta.update(normalized=True, fit=fit, phase=fit.phase)
    else:
        wf.meta.update(normalized=False)
    return wf


def numerov_phase(model: PotentialModel, l: int, p: float, m: float,
                  hp: float = 0.004) -> float:
    """Phase shift in ``(-pi/2, pi/2]`` from a Numerov solution and fit."""
    win = default_window(p, model.r_max)
    grid = uniform_grid(p, win[1], model.breakpoints, hp)
    wf = numerov_solve(model, l, p, m, grid, win)
    return reduce_phase(wf.meta["phase"])
