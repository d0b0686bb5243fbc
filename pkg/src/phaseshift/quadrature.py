"""
Adaptive, principal-value and oscillatory-tail quadrature.

All integrands are *vectorized*: ``f(x)`` receives a 1-D array of abscissae
and returns an array whose first axis matches ``x``.  Trailing axes are
allowed, in which case every routine integrates all components at once and
the error estimate is the largest component error.

Routines
--------
integrate_adaptive
    Globally adaptive bisection with a 21-point Gauss-Kronrod panel rule.
pv_integrate
    Cauchy principal value through a simple pole, by folding a symmetric
    window about the pole so that the odd singular part cancels pointwise.
integrate_tail_oscillatory
    Semi-infinite integrals of decaying oscillatory integrands, summed
    panel by panel and accelerated with the Levin u-transform.
PanelRule
    Composite Gauss-Legendre rule with spectrally accurate cumulative
    integrals, used for nested position-space integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

Integrand = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067610285,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

KRONROD_NODES = np.concatenate([-_XGK[:10], [0.0], _XGK[:10][::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:10], [_WGK[10]], _WGK[:10][::-1]])
GAUSS_WEIGHTS = np.zeros(21)
for _j, _i in enumerate((1, 3, 5, 7, 9)):
    GAUSS_WEIGHTS[_i] = _WG[_j]
    GAUSS_WEIGHTS[20 - _i] = _WG[_j]


class QuadratureError(RuntimeError):
    """Raised when a quadrature does not reach its tolerance.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message: str, result: "QuadratureResult | None" = None):
        super().__init__(message)
        self.result = result


class PoleOrderError(ValueError):
    """The integrand is more singular than a simple pole at the PV point."""


class TailDivergenceError(ValueError):
    """The tail envelope does not decay fast enough for convergence."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float
    evaluations: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
            {**self.diagnostics, **other.diagnostics},
        )


def _zero_like(f: Integrand, x0: float) -> np.ndarray:
    sample = np.asarray(f(np.array([x0], dtype=float)))
    return np.zeros(sample.shape[1:])


def _kronrod_panels(f: Integrand, lo: np.ndarray, hi: np.ndarray):
    """Apply the 21-point rule to every panel ``[lo[i], hi[i]]`` at once."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    fx = np.asarray(f(x), dtype=float)
    tail = fx.shape[1:]
    fx = fx.reshape((lo.size, 21, -1))
    h = half[:, None]
    kron = h * np.einsum("j,mjc->mc", KRONROD_WEIGHTS, fx)
    gauss = h * np.einsum("j,mjc->mc", GAUSS_WEIGHTS, fx)
    resabs = h * np.einsum("j,mjc->mc", KRONROD_WEIGHTS, np.abs(fx))
    mean = kron / np.where(h == 0, 1.0, 2.0 * h)
    resasc = h * np.einsum("j,mjc->mc", KRONROD_WEIGHTS, np.abs(fx - mean[:, None, :]))
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    at_floor = err <= floor
    err = np.maximum(err, floor)
    return (
        kron.reshape((lo.size,) + tail),
        err.max(axis=1),
        at_floor.all(axis=1),
        x.size,
    )


def integrate_adaptive(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
    max_intervals: int = 5000,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` to an absolute tolerance.

    Every round bisects all panels whose error exceeds their share
    ``tol * width / (b - a)`` of the budget, so the work is batched into a
    single vectorized call per round.  Panels whose error has reached the
    round-off floor are not split further.

    Raises
    ------
    QuadratureError
        If ``max_intervals`` panels are exceeded; the exception carries the
        best estimate.
    """
    a = float(a)
    b = float(b)
    if a == b:
        zero = _zero_like(f, a)
        return QuadratureResult(float(zero) if zero.ndim == 0 else zero, 0.0, 1)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    length = b - a

    lo = np.array([a])
    hi = np.array([b])
    val, err, floor, nev = _kronrod_panels(f, lo, hi)
    evaluations = nev
    while True:
        total = val.sum(axis=0)
        errsum = float(err.sum())
        if not (math.isfinite(errsum) and np.all(np.isfinite(total))):
            raise QuadratureError(f"integrand is not finite on [{a}, {b}]")
        target = max(tol, rtol * float(np.max(np.abs(total))))
        if errsum <= target:
            break
        width = hi - lo
        share = target * width / length
        split = (err > share) & ~floor
        split &= width > 64.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300
        if not split.any():
            # Nothing left that can be refined: round-off limited.
            break
        if lo.size + split.sum() > max_intervals:
            order = np.argsort(lo)
            best = QuadratureResult(
                sign * val[order].sum(axis=0), errsum, evaluations,
                {"intervals": lo.size},
            )
            raise QuadratureError(
                f"adaptive quadrature on [{a}, {b}] did not converge "
                f"(error {errsum:.3e} > {target:.3e}, {lo.size} panels)",
                best,
            )
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nval, nerr, nfloor, nev = _kronrod_panels(f, new_lo, new_hi)
        evaluations += nev
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        floor = np.concatenate([floor[keep], nfloor])
        order = np.argsort(lo, kind="stable")
        lo, hi, val, err, floor = lo[order], hi[order], val[order], err[order], floor[order]

    value = sign * val.sum(axis=0)
    if np.ndim(value) == 0:
        value = float(value)
    return QuadratureResult(value, float(err.sum()), evaluations, {"intervals": lo.size})


@dataclass(frozen=True)
class PVSpec:
    """Principal-value problem: simple pole at ``singularity`` inside ``[a, b]``.

    ``window`` optionally caps the half-width of the symmetric excision
    window; by default the largest window fitting inside ``[a, b]`` is used.
    """

    singularity: float
    a: float
    b: float
    tol: float = 1e-10
    window: float | None = None

    def __post_init__(self):
        if not self.a < self.singularity < self.b:
            raise ValueError(
                f"singularity {self.singularity} must lie strictly inside "
                f"[{self.a}, {self.b}]"
            )
        if self.window is not None and self.window <= 0:
            raise ValueError("window must be positive")

    @property
    def half_width(self) -> float:
        h = min(self.singularity - self.a, self.b - self.singularity)
        if self.window is not None:
            h = min(h, self.window)
        return h


def _check_simple_pole(f: Integrand, c: float, h: float) -> None:
    q = h * np.array([1e-2, 1e-4, 1e-6])
    x = np.concatenate([c + q, c - q])
    fx = np.asarray(f(x), dtype=float).reshape(6, -1)
    scaled = np.abs(fx) * np.concatenate([q, q])[:, None]
    size = np.maximum(scaled[:3], scaled[3:]).max(axis=1)
    if not np.all(np.isfinite(size)):
        raise PoleOrderError(f"integrand is not finite near the pole at {c}")
    # (x - c) f stays bounded for a simple pole and grows 100x per probe for a double one
    if size[2] > 10.0 * max(size[0], size[1]) + 1e-300:
        raise PoleOrderError(
            f"(x - c) f(x) is unbounded near c = {c}: pole of order > 1"
        )


def pv_integrate(f: Integrand, spec: PVSpec) -> QuadratureResult:
    """Principal value of ``f`` over ``[spec.a, spec.b]``.

    On the window ``[c - h, c + h]`` the integrand is folded to
    ``f(c + q) + f(c - q)`` for ``q`` in ``(0, h]``; the residue terms cancel
    exactly, leaving a regular integrand.  The remainder of the interval is
    integrated adaptively.
    """
    c = float(spec.singularity)
    h = spec.half_width
    _check_simple_pole(f, c, h)

    def folded(q):
        return np.asarray(f(c + q)) + np.asarray(f(c - q))

    parts = [integrate_adaptive(folded, 0.0, h, spec.tol / 2)]
    if c - h > spec.a:
        parts.append(integrate_adaptive(f, spec.a, c - h, spec.tol / 4))
    if c + h < spec.b:
        parts.append(integrate_adaptive(f, c + h, spec.b, spec.tol / 4))
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return QuadratureResult(
        total.value, total.error_estimate, total.evaluations,
        {"pv_window": h},
    )


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = legendre.leggauss(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def _levin_u(partial: np.ndarray, terms: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """Levin u-transform of the whole sequence, vectorized over components.

    ``partial`` and ``terms`` have shape ``(n, c)``; uses all ``n`` entries,
    so the transform order is ``n - 1``.
    """
    n = partial.shape[0]
    k = n - 1
    j = np.arange(n)
    binom = np.array([math.comb(k, int(i)) for i in j], dtype=float)
    ratio = ((beta + j) / (beta + k)) ** (k - 1) if k > 1 else np.ones(n)
    coef = ((-1.0) ** j) * binom * ratio
    omega = (beta + j)[:, None] * terms
    tiny = np.abs(omega) < 1e-300
    omega = np.where(tiny, 1e-300, omega)
    num = np.einsum("j,jc->c", coef, partial / omega)
    den = np.einsum("j,jc->c", coef, 1.0 / omega)
    return num / den


def _decay_exponent(amp1: np.ndarray, amp2: np.ndarray, x1: float, x2: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.log(amp2 / amp1) / math.log(x2 / x1)


def _levin_with_error(terms: np.ndarray, order: int):
    n = terms.shape[0]
    k = min(order, n - 3)
    partial = np.cumsum(terms, axis=0)
    est = _levin_u(partial[n - k - 1:], terms[n - k - 1:])
    shifted = _levin_u(partial[n - k - 2:n - 1], terms[n - k - 2:n - 1])
    lower = _levin_u(partial[n - k:], terms[n - k:])
    err = np.maximum(np.abs(est - shifted), np.abs(est - lower))
    if not np.all(np.isfinite(est)):
        return est, np.inf
    return est, float(np.max(err))


def _best_levin(t_half: np.ndarray, full: np.ndarray, order: int):
    est_h, err_h = _levin_with_error(t_half, order)
    est_f, err_f = _levin_with_error(full, order)
    if err_h <= err_f:
        return est_h, err_h, "half-period"
    return est_f, err_f, "full-period"


def integrate_tail_oscillatory(
    f: Integrand,
    a: float,
    period_scale: float,
    tol: float = 1e-10,
    *,
    rtol: float = 0.0,
    nodes_per_panel: int = 24,
    periods: int = 32,
    max_periods: int = 2048,
    levin_order: int = 10,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, inf)`` for a decaying oscillatory ``f``.

    ``period_scale`` is the half period of the oscillation.  Half-period
    panels are integrated with a fixed Gauss-Legendre rule.  Two series are
    extrapolated with the Levin u-transform: the alternating half-period
    series (fast for purely oscillatory integrands) and the series of
    full-period pairs (one Euler averaging step, which strips the
    alternating part and leaves algebraic convergence when the integrand
    has a non-oscillatory component).  The self-consistent one wins.

    Raises
    ------
    TailDivergenceError
        If the envelope decays slower than ``1/x`` or the period sums decay
        no faster than ``1/x`` (a non-oscillatory ``1/x`` tail diverges).
    QuadratureError
        If the extrapolation does not settle within ``max_periods``.
    """
    if period_scale <= 0:
        raise ValueError("period_scale must be positive")
    x_ref, w_ref = legendre.leggauss(nodes_per_panel)
    h = float(period_scale)
    evaluations = 0
    t_half = None
    n_done = 0

    def panels(start: int, stop: int) -> np.ndarray:
        left = a + h * np.arange(start, stop)
        x = (left[:, None] + 0.5 * h * (1.0 + x_ref[None, :])).ravel()
        fx = np.asarray(f(x), dtype=float)
        fx = fx.reshape((stop - start, nodes_per_panel, -1))
        integ = 0.5 * h * np.einsum("j,pjc->pc", w_ref, fx)
        env = np.abs(fx).max(axis=1)
        return integ, env, x.size

    n_periods = periods
    envelope = None
    while True:
        integ, env, nev = panels(2 * n_done, 2 * n_periods)
        evaluations += nev
        t_half = integ if t_half is None else np.concatenate([t_half, integ])
        envelope = env if envelope is None else np.concatenate([envelope, env])
        n_done = n_periods

        scale = envelope.max(axis=0)
        if not np.any(scale > 0):
            return QuadratureResult(
                0.0 if t_half.shape[1] == 1 else np.zeros(t_half.shape[1]),
                0.0, evaluations, {"periods": n_done},
            )

        full = t_half[0::2] + t_half[1::2]
        n = full.shape[0]
        # Decay probes over blocks of periods near n/4 and near n.
        blk = max(2, n // 16)
        i1 = n // 4
        x1 = a + 2 * h * (i1 + 0.5 * blk)
        x2 = a + 2 * h * (n - 0.5 * blk)
        env1 = envelope[2 * i1:2 * (i1 + blk)].max(axis=0)
        env2 = envelope[2 * (n - blk):].max(axis=0)
        per1 = np.abs(full[i1:i1 + blk]).mean(axis=0)
        per2 = np.abs(full[n - blk:]).mean(axis=0)
        live = env2 > max(tol, 1e-300) * 1e-3 / (2 * h)
        s_env = _decay_exponent(env1, env2, x1, x2)
        if np.any(live & (s_env < 0.85)):
            raise TailDivergenceError(
                f"tail envelope decays like x^-{np.nanmin(s_env[live]):.2f}; "
                "needs at least 1/x"
            )
        sig = live & (per2 * n > tol)
        s_per = _decay_exponent(per1, per2, x1, x2)
        if np.any(sig & (s_per < 1.15)):
            raise TailDivergenceError(
                "period sums decay like "
                f"x^-{np.nanmin(s_per[sig]):.2f}: the tail integral diverges"
            )

        est, err, variant = _best_levin(t_half, full, levin_order)
        err = max(err, float(np.max(np.abs(est))) * 1e3 * _EPS)
        target = max(tol, rtol * float(np.max(np.abs(est))))
        if err <= target or 2 * n_periods > max_periods:
            break
        n_periods *= 2

    value = est[0] if est.size == 1 else est
    result = QuadratureResult(
        float(value) if np.ndim(value) == 0 else value,
        err, evaluations, {"periods": n_done, "series": variant},
    )
    if err > target:
        raise QuadratureError(
            f"oscillatory tail from {a} did not converge (error {err:.3e})",
            result,
        )
    return result


class PanelRule:
    """Composite Gauss-Legendre rule on ``[edges[0], edges[-1]]``.

    Besides plain integrals the rule supplies cumulative integrals
    ``F(x) = int_{edges[0]}^x g`` of sampled integrands, exact for
    polynomials of degree ``n_nodes - 1`` on every panel.  Panel edges are
    the natural place for discontinuities of the integrand.
    """

    def __init__(self, edges, n_nodes: int = 16):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing with >= 2 entries")
        self.edges = edges
        self.n_nodes = n_nodes
        x, w = legendre.leggauss(n_nodes)
        self._x = x
        self._w = w
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        self.nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()
        self._half = half
        # Inverse Legendre-Vandermonde: samples -> coefficients.
        self._vinv = np.linalg.inv(legendre.legvander(x, n_nodes - 1))
        self._local = self._antiderivative_rows(x)

    @classmethod
    def covering(cls, a: float, b: float, max_width: float, breakpoints=(), n_nodes: int = 16):
        """Rule on ``[a, b]`` with panels no wider than ``max_width`` and
        edges at every breakpoint inside the interval."""
        cuts = sorted({float(a), float(b), *[float(t) for t in breakpoints if a < t < b]})
        edges = [cuts[0]]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            count = max(1, int(math.ceil((hi - lo) / max_width)))
            edges.extend(np.linspace(lo, hi, count + 1)[1:])
        return cls(edges, n_nodes)

    @property
    def a(self) -> float:
        return float(self.edges[0])

    @property
    def b(self) -> float:
        return float(self.edges[-1])

    def _antiderivative_rows(self, t: np.ndarray) -> np.ndarray:
        n = self.n_nodes
        pv = legendre.legvander(t, n)
        rows = np.empty((t.size, n))
        rows[:, 0] = t + 1.0
        for m in range(1, n):
            rows[:, m] = (pv[:, m + 1] - pv[:, m - 1]) / (2 * m + 1)
        return rows @ self._vinv

    def _panels(self, values):
        values = np.asarray(values, dtype=float)
        return values.reshape((self._half.size, self.n_nodes) + values.shape[1:])

    def integrate(self, values) -> np.ndarray | float:
        values = np.asarray(values, dtype=float)
        out = np.tensordot(self.weights, values, axes=(0, 0))
        return float(out) if np.ndim(out) == 0 else out

    def _panel_totals(self, g):
        totals = np.tensordot(self._w, g, axes=(0, 1)) * self._half.reshape(
            (-1,) + (1,) * (g.ndim - 2))
        before = np.cumsum(totals, axis=0) - totals
        return totals, before

    def cumulative(self, values) -> np.ndarray:
        """``int_a^{x_i} g`` at every node ``x_i``."""
        g = self._panels(values)
        _, before = self._panel_totals(g)
        local = np.einsum("ij,pj...->pi...", self._local, g)
        local = local * self._half.reshape((-1,) + (1,) * (g.ndim - 1))
        return (before[:, None] + local).reshape(np.asarray(values).shape)

    def cumulative_at(self, values, x) -> np.ndarray:
        """``int_a^x g`` at arbitrary points, clipped to ``[a, b]``."""
        g = self._panels(values)
        totals, before = self._panel_totals(g)
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        flat = x.ravel()
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, self._half.size - 1)
        mid = 0.5 * (self.edges[idx] + self.edges[idx + 1])
        t = np.clip((flat - mid) / self._half[idx], -1.0, 1.0)
        rows = self._antiderivative_rows(t)
        local = np.einsum("mj,mj...->m...", rows, g[idx]) * self._half[idx].reshape(
            (-1,) + (1,) * (g.ndim - 2))
        out = before[idx] + local
        return out.reshape(x.shape + g.shape[2:])
