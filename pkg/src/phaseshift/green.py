"""
Iterative solution of the radial integral equation with the symmetric Green function.

    y(r) = ybar(r) - int_0^inf dr' G(r, r') V(r') y(r')
    G(r, r') = -(pi m / k) * { jbar(kr) nbar(kr')  r < r'
                               nbar(kr) jbar(kr')  r > r' }

so that an iterate built from ``y_n`` reads

    y_{n+1}(r) = jbar(r) + (pi m / k) [nbar(r) int_0^r jbar V y_n + jbar(r) int_r^inf nbar V y_n].

Both running integrals are tabulated once on a composite Gauss rule
(cumulative tables), which makes the nested second-order integrals cost the
same as the first-order ones.  Beyond the potential ``y_{n+1}`` is exactly
``sqrt(2/pi) [A s_l + B c_l]`` with ``A = 1`` and
``B = -(pi m / k) int jbar V y_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import RadialWavefunction
from .potential import PotentialModel
from .quadrature import PanelRule
from .specfun import free_irregular, free_regular
from .unitary import PhaseShiftResult


def green_function(l: int, k: float, r, r_prime, m: float):
    """Symmetric Green function ``G(r, r')`` for ``r, r' > 0``."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(r_prime, dtype=float)
    if np.any(r <= 0) or np.any(rp <= 0):
        raise ValueError("the Green function is defined for r, r' > 0")
    lo = np.minimum(r, rp)
    hi = np.maximum(r, rp)
    out = -(math.pi * m / k) * free_regular(l, k, lo) * free_irregular(l, k, hi)
    return float(out) if np.ndim(out) == 0 else out


def phase_from_coeffs(A: float, B: float) -> float:
    """Renormalized phase: ``cos D = A / |(A, B)|``, ``sin D = B / |(A, B)|``."""
    if A == 0 and B == 0:
        raise ValueError("phase undefined for A = B = 0")
    return math.atan2(B, A)


def _rule(model: PotentialModel, p: float) -> PanelRule:
    model.check_admissible()
    r_max = model.r_max
    bps = tuple(b for b in model.breakpoints if 0 < b < r_max)
    return PanelRule.covering(0.0, r_max, min(r_max, 0.5 * math.pi / p), breakpoints=bps,
                              n_nodes=24)


@dataclass
class _Source:
    """Tabulated integrands ``jbar V y_n`` and ``nbar V y_n`` of one iteration."""

    rule: PanelRule
    jv: np.ndarray
    nv: np.ndarray
    cn_total: float = field(init=False)
    cj_total: float = field(init=False)

    def __post_init__(self):
        self.cj_total = float(self.rule.integrate(self.jv))
        self.cn_total = float(self.rule.integrate(self.nv))


@dataclass
class GreenIterate:
    """The ``order``-th iterate and its asymptotic coefficients.

    ``samples`` holds the iterate on the caller's radial grid; ``A_n`` and
    ``B_n`` are its sin/cos coefficients outside the potential and
    ``Delta_n = atan2(B_n, A_n)`` is the renormalized total phase.
    """

    order: int
    samples: RadialWavefunction | None
    A_n: float
    B_n: float
    Delta_n: float
    model: PotentialModel
    l: int
    p: float
    m: float
    rule: PanelRule
    node_values: np.ndarray
    source: _Source | None = None

    @property
    def norm_drift(self) -> float:
        """``A^2 + B^2 - 1``, the normalization error before renormalization."""
        return self.A_n**2 + self.B_n**2 - 1.0

    def __call__(self, r):
        """Evaluate the iterate at arbitrary radii."""
        r = np.asarray(r, dtype=float)
        jb = free_regular(self.l, self.p, r)
        if self.source is None:
            return jb
        out = np.array(jb, dtype=float, copy=True, ndmin=1)
        rr = np.atleast_1d(r)
        pos = rr > 0
        inside = pos & (rr < self.rule.b)
        c = math.pi * self.m / self.p
        src = self.source
        cj = np.full(rr.shape, src.cj_total)
        cn = np.full(rr.shape, src.cn_total)
        if np.any(inside):
            cj[inside] = src.rule.cumulative_at(src.jv, rr[inside])
            cn[inside] = src.rule.cumulative_at(src.nv, rr[inside])
        nb = np.zeros_like(rr)
        nb[pos] = free_irregular(self.l, self.p, rr[pos])
        out = out + c * (nb * cj + np.atleast_1d(jb) * (src.cn_total - cn))
        out[~pos] = 0.0
        return float(out[0]) if np.ndim(r) == 0 else out.reshape(r.shape)


def _wavefunction(it: GreenIterate, r_grid) -> RadialWavefunction | None:
    if r_grid is None:
        return None
    r = np.asarray(r_grid, dtype=float)
    return RadialWavefunction(r, it(r), it.p, it.l, it.model.r_max,
                              {"method": f"green{it.order}"})


def free_iterate(model: PotentialModel, l: int, p: float, m: float, r_grid=None) -> GreenIterate:
    """Order-0 iterate: the free regular solution, ``A = 1``, ``B = 0``."""
    rule = _rule(model, p)
    it = GreenIterate(0, None, 1.0, 0.0, 0.0, model, l, p, m, rule,
                      free_regular(l, p, rule.nodes))
    it.samples = _wavefunction(it, r_grid)
    return it


def iterate(model: PotentialModel, l: int, p: float, m: float, prev: GreenIterate,
            r_grid=None) -> GreenIterate:
    """Next iterate ``y_{n+1} = ybar - int G V y_n`` (integral truncated at the support)."""
    rule = prev.rule
    r = rule.nodes
    v = model.evaluate(r)
    jb = free_regular(l, p, r)
    nb = free_irregular(l, p, r)
    src = _Source(rule, jb * v * prev.node_values, nb * v * prev.node_values)
    c = math.pi * m / p
    cj = rule.cumulative(src.jv)
    cn = rule.cumulative(src.nv)
    values = jb + c * (nb * cj + jb * (src.cn_total - cn))
    A = 1.0
    B = -c * src.cj_total
    it = GreenIterate(prev.order + 1, None, A, B, phase_from_coeffs(A, B), model, l, p, m,
                      rule, values, src)
    it.samples = _wavefunction(it, r_grid)
    return it


def first_order_coeffs(model: PotentialModel, l: int, p: float, m: float,
                       r_max: float | None = None) -> tuple[float, float]:
    """Running integrals ``(A1(r_max), B1(r_max))``.

    ``A1 = (pi m / p) int_0^r nbar V jbar`` and
    ``B1 = (pi m / p) int_0^r jbar V jbar``; the first-order phase is ``-B1``.
    """
    rule = _rule(model, p)
    support = model.r_max
    if r_max is None:
        r_max = support
    if model.range_class == "finite" and r_max < support * (1 - 1e-12):
        raise ValueError(f"r_max = {r_max:g} lies inside the potential support {support:g}")
    r = rule.nodes
    v = model.evaluate(r)
    jb = free_regular(l, p, r)
    nb = free_irregular(l, p, r)
    c = math.pi * m / p
    return float(c * rule.integrate(nb * v * jb)), float(c * rule.integrate(jb * v * jb))


def first_order_phase(model: PotentialModel, l: int, p: float, m: float) -> PhaseShiftResult:
    """``delta1 = -B1(inf)``."""
    A1, B1 = first_order_coeffs(model, l, p, m)
    return PhaseShiftResult("green", 1, -B1, 1e-14 * max(1.0, abs(B1)), {"A1": A1, "B1": B1})


def second_order_phase(model: PotentialModel, l: int, p: float, m: float) -> PhaseShiftResult:
    """Second-order phase from the first two renormalized iterates.

    The iterates carry ``A = 1 + a1 lam + ...`` and ``B = b1 lam + b2 lam^2``;
    the renormalized phase ``atan2(B, A)`` is expanded in ``lam`` and its
    ``lam**2`` coefficient, ``b2 - a1 b1``, is returned.  The full
    ``atan2(B2, A2) - delta1`` additionally contains an incomplete
    ``O(lam^3)`` part; it is reported in the diagnostics.
    """
    it0 = free_iterate(model, l, p, m)
    it1 = iterate(model, l, p, m, it0)
    it2 = iterate(model, l, p, m, it1)
    d1 = first_order_phase(model, l, p, m).value
    B1 = it1.B_n
    a1 = it1.A_n - 1.0
    value = (it2.B_n - B1) - a1 * B1
    return PhaseShiftResult("green", 2, value, 1e-13 * max(1.0, abs(B1)), {
        "Delta2": it2.Delta_n,
        "Delta2_minus_delta1": it2.Delta_n - d1,
        "A2": it2.A_n,
        "B2": it2.B_n,
        "norm_drift": it2.norm_drift,
        "delta1": d1,
    })
