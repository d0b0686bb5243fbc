"""
Exact s-wave phase shift of the square well/barrier and its eta-expansion.

Inside the potential the solution is ``j0(p' r)``, outside a combination of
``j0(p r)`` and ``n0(p r)``.  Matching value and derivative at ``r = R``
gives the determinants

    A0 = kappa^2 j0(kappa') n0'(kappa) - kappa' kappa n0(kappa) j0'(kappa')
    B0 = kappa' kappa j0(kappa) j0'(kappa') - kappa^2 j0(kappa') j0'(kappa)

and ``exp(2 i delta0) = (A0 - i B0)^2 / (A0^2 + B0^2)``, i.e.
``delta0 = atan2(-B0, A0)`` reduced into ``(-pi/2, pi/2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ScatteringParams, derive_dimensionless


class RichardsonError(ArithmeticError):
    """Finite-difference estimates disagree beyond tolerance."""


@dataclass(frozen=True)
class ExactWellSolution:
    """Matching determinants and phase of the exact s-wave solution.

    ``delta0`` lies in ``(-pi/2, pi/2]``; ``branch`` is the winding added by
    :func:`unwrap_sweep` for continuity along a sweep (0 otherwise).
    """

    A0: float
    B0: float
    delta0: float
    branch: int = 0
    evanescent: bool = False

    @property
    def unwrapped(self) -> float:
        return self.delta0 + math.pi * self.branch

    @property
    def s_matrix(self) -> complex:
        z = complex(self.A0, -self.B0)
        return z * z / (self.A0**2 + self.B0**2)


def _interior(kp2: float) -> tuple[float, float]:
    """``(j0(kappa'), kappa' j0'(kappa'))`` up to a common positive factor.

    For ``kappa'^2 < 0`` the analytic continuation ``j0(i mu) = sinh(mu)/mu``
    is used, scaled by ``1/cosh(mu)`` so nothing overflows.
    """
    if kp2 > 0:
        x = math.sqrt(kp2)
        if x < 1e-4:
            J = 1.0 - kp2 / 6.0
            return J, -kp2 / 3.0
        J = math.sin(x) / x
        return J, math.cos(x) - J
    if kp2 == 0:
        return 1.0, 0.0
    mu = math.sqrt(-kp2)
    if mu < 1e-4:
        J = 1.0 - kp2 / 6.0
        return J, -kp2 / 3.0
    t = math.tanh(mu)
    J = t / mu
    return J, 1.0 - J


def exact_phase_shift_s(params: ScatteringParams) -> ExactWellSolution:
    """Exact ``l = 0`` phase shift for ``V = lam / R`` on ``[0, R]``."""
    if params.l != 0:
        raise ValueError("the exact solution is implemented for l = 0 only")
    g = derive_dimensionless(params)
    k = g.kappa
    J, D = _interior(g.kappa_prime_sq)
    s, c = math.sin(k), math.cos(k)
    j0 = s / k
    n0 = -c / k
    j0p = c / k - s / (k * k)
    n0p = s / k + c / (k * k)
    A0 = k * k * J * n0p - k * n0 * D
    B0 = k * j0 * D - k * k * J * j0p
    if params.lam == 0:
        B0 = 0.0
    delta = math.atan2(-B0, A0)
    # reduce into (-pi/2, pi/2]
    if delta > math.pi / 2:
        delta -= math.pi
    elif delta <= -math.pi / 2:
        delta += math.pi
    return ExactWellSolution(A0, B0, delta, 0, g.evanescent)


def unwrap_sweep(solutions) -> list[ExactWellSolution]:
    """Assign branch windings so consecutive phases never jump by ~pi."""
    out = []
    branch = 0
    prev = None
    for sol in solutions:
        if prev is not None:
            step = sol.delta0 + math.pi * branch - prev
            branch -= int(round(step / math.pi))
        unwrapped = sol.delta0 + math.pi * branch
        out.append(ExactWellSolution(sol.A0, sol.B0, sol.delta0, branch, sol.evanescent))
        prev = unwrapped
    return out


def _delta_at(base: ScatteringParams, eta: float) -> float:
    p = base.p
    return exact_phase_shift_s(base.with_(lam=eta * p / base.m)).delta0


@dataclass(frozen=True)
class EtaSeries:
    c1: float
    c2: float
    h: float
    richardson_residual: tuple[float, float]


def eta_series_coefficients(params_at_eta0: ScatteringParams, orders: int = 2,
                            h: float = 1e-3, tol: float = 1e-7) -> EtaSeries:
    """``d delta0/d eta`` and ``(1/2) d^2 delta0/d eta^2`` at ``eta = 0``.

    Central differences with steps ``h`` and ``h/2`` are combined by one
    Richardson step (the leading error is ``O(h^2)``).  The disagreement
    between the two raw estimates, scaled by the Richardson factor, is the
    error estimate; exceeding ``tol`` raises :class:`RichardsonError`.

    Parameters
    ----------
    params_at_eta0 : ScatteringParams
        Fixes ``m``, ``R`` and ``p``; the coupling is ignored.
    """
    if orders != 2:
        raise ValueError("only orders=2 is supported")
    kappa = params_at_eta0.kappa
    if not h < kappa / 4:
        raise ValueError(f"step h = {h:g} outside the convergence region |eta| < kappa/2")

    def raw(step):
        dp = _delta_at(params_at_eta0, step)
        dm = _delta_at(params_at_eta0, -step)
        d0 = _delta_at(params_at_eta0, 0.0)
        return (dp - dm) / (2 * step), (dp - 2 * d0 + dm) / (2 * step * step)

    a1, a2 = raw(h)
    b1, b2 = raw(h / 2)
    c1 = (4 * b1 - a1) / 3
    c2 = (4 * b2 - a2) / 3
    res = (abs(b1 - a1) / 3, abs(b2 - a2) / 3)
    if max(res) > tol:
        raise RichardsonError(
            f"Richardson residuals {res[0]:.2e}, {res[1]:.2e} exceed {tol:.0e}; reduce h"
        )
    return EtaSeries(c1, c2, h, res)
