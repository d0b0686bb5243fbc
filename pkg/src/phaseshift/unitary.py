"""
Unitary stationary perturbation theory for the radial equation.

The interacting solutions are obtained from the free ones by a unitary map
``exp(-i Theta)`` with ``Theta = lam Theta1 + lam**2 Theta2 / 2``.  In the free
momentum basis

    Theta1(k1, k2) = -i 2m U(k1, k2) / (k1^2 - k2^2)
    Theta2(k1, k2) = -i 2m / (k1^2 - k2^2)
                     * PV int dk 2m U(k1, k) U(k, k2) [1/(k1^2 - k^2) - 1/(k^2 - k2^2)]

and the diagonal is excluded (principal-part rule).  Generator elements are
stored as the real coefficient of ``-i``, which is antisymmetric.

The phase shifts follow from the Wronskian formula:

    delta1 = -(pi m / p) <p|V|p>
    delta2 = (2 pi m^2 / p) PV int dk <k|V|p>^2 / (k^2 - p^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .asymptotics import RadialWavefunction
from .potential import KernelMatrix, PotentialModel, build_kernel, u_elements
from .quadrature import (
    PVSpec,
    QuadratureResult,
    gauss_legendre,
    integrate_tail_oscillatory,
    pv_integrate,
)
from .specfun import SQRT_2_OVER_PI, free_regular


class DiagonalSingularityError(ValueError):
    """A generator element was requested on the diagonal ``k1 == k2``."""


@dataclass(frozen=True)
class QuadConfig:
    """Momentum-integration knobs.

    Parameters
    ----------
    k_cut_over_p : float, optional
        Cut between the finite PV integral and the oscillatory tail, as a
        multiple of the on-shell momentum.  Default ``k_cut = p + 40 / R``.
    pv_window : float, optional
        Cap on the half-width of the symmetric window around each pole.
    tol_abs : float
        Absolute tolerance of the momentum integrals.
    grid_nodes : int
        Gauss-Legendre nodes of the discrete momentum grid.
    tail : bool
        Add the accelerated tail beyond ``k_cut``.
    """

    k_cut_over_p: float | None = None
    pv_window: float | None = None
    tol_abs: float = 1e-12
    grid_nodes: int = 64
    tail: bool = True

    def __post_init__(self):
        if self.k_cut_over_p is not None and not self.k_cut_over_p > 1:
            raise ValueError("k_cut_over_p must exceed 1")
        if self.pv_window is not None and not self.pv_window > 0:
            raise ValueError("pv_window must be positive")
        if not self.tol_abs > 0:
            raise ValueError("tol_abs must be positive")
        if self.grid_nodes < 2:
            raise ValueError("grid_nodes must be at least 2")

    def k_cut(self, p: float, model: PotentialModel) -> float:
        if self.k_cut_over_p is not None:
            return self.k_cut_over_p * p
        return p + 40.0 / model.scale


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class GeneratorElement:
    """``Theta^(order)(k1, k2) = -i * value``; ``value`` is antisymmetric."""

    order: int
    k1: float
    k2: float
    value: float
    error_estimate: float = 0.0

    @property
    def complex_value(self) -> complex:
        return -1j * self.value


@dataclass
class PhaseShiftResult:
    """One phase-shift contribution with its error estimate."""

    method: str
    order: int
    value: float
    error_estimate: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


@dataclass
class PerturbativeWavefunction:
    """Order-``lam`` wavefunction ``ybar(r, p) - lam PV int dk ybar(r, k) 2m U(k, p)/(k^2 - p^2)``.

    Calling the object evaluates the wavefunction at arbitrary radii with
    the same settings.
    """

    p: float
    samples: RadialWavefunction | None
    pv_diagnostics: dict
    model: PotentialModel
    l: int
    m: float
    lam: float
    quad: QuadConfig

    def __call__(self, r):
        values, _ = _first_order_values(self.model, self.l, self.p, self.m, self.lam,
                                        np.asarray(r, dtype=float), self.quad)
        return values


def _tail_half_period(model: PotentialModel) -> float:
    # products of two matrix elements oscillate like cos(2 k r_max)
    return math.pi / (2.0 * model.r_max)


def _pv_plus_tail(f, pole: float, lo: float, k_cut: float, model: PotentialModel,
                  cfg: QuadConfig, tail_tol: float) -> tuple[QuadratureResult, dict]:
    spec = PVSpec(pole, lo, k_cut, cfg.tol_abs, cfg.pv_window)
    core = pv_integrate(f, spec)
    diag = {"pv_window": spec.half_width, "core_error": core.error_estimate, "k_cut": k_cut}
    if not cfg.tail:
        diag["tail"] = 0.0
        return core, diag
    tail = integrate_tail_oscillatory(f, k_cut, _tail_half_period(model), tail_tol, rtol=1e-6)
    diag.update(tail=tail.value, tail_error=tail.error_estimate,
                tail_periods=tail.diagnostics.get("periods"))
    return core + tail, diag


def theta1(model: PotentialModel, l: int, k1: float, k2: float, m: float) -> GeneratorElement:
    """First-order generator element (coefficient of ``-i``)."""
    if k1 == k2:
        raise DiagonalSingularityError(
            "Theta1 is singular on the diagonal; the principal-part rule excludes it"
        )
    u = float(u_elements(model, l, k1, k2))
    return GeneratorElement(1, k1, k2, 2.0 * m * u / (k1 * k1 - k2 * k2))


def theta2(model: PotentialModel, l: int, k1: float, k2: float, m: float,
           quad_cfg: QuadConfig = DEFAULT_QUAD) -> GeneratorElement:
    """Second-order generator element (coefficient of ``-i``).

    The inner integral is split at ``(k1 + k2)/2`` so that each side holds a
    single pole, handled by its own principal-value window.
    """
    if k1 == k2:
        raise DiagonalSingularityError(
            "Theta2 is singular on the diagonal; the principal-part rule excludes it"
        )
    lo_pole, hi_pole = sorted((k1, k2))
    k_cut = quad_cfg.k_cut(hi_pole, model)
    kmax = k_cut + hi_pole

    def g(k):
        uu = u_elements(model, l, k1, k, k_max=max(kmax, np.max(k) + hi_pole)) * \
            u_elements(model, l, k, k2, k_max=max(kmax, np.max(k) + hi_pole))
        return 2.0 * m * uu * (1.0 / (k1 * k1 - k * k) - 1.0 / (k * k - k2 * k2))

    mid = 0.5 * (k1 + k2)
    lower = pv_integrate(g, PVSpec(lo_pole, 0.0, mid, quad_cfg.tol_abs, quad_cfg.pv_window))
    upper = pv_integrate(g, PVSpec(hi_pole, mid, k_cut, quad_cfg.tol_abs, quad_cfg.pv_window))
    total = lower + upper
    if quad_cfg.tail:
        total = total + integrate_tail_oscillatory(
            g, k_cut, _tail_half_period(model), quad_cfg.tol_abs * 1e-2, rtol=1e-6
        )
    pref = 2.0 * m / (k1 * k1 - k2 * k2)
    return GeneratorElement(2, k1, k2, pref * total.value, abs(pref) * total.error_estimate)


def delta1(model: PotentialModel, l: int, p: float, m: float,
           lam: float | None = None) -> PhaseShiftResult:
    """First-order phase shift ``-(pi m / p) lam U_l(p, p)``.

    ``lam`` defaults to the model's own coupling.
    """
    lam = model.lam if lam is None else lam
    u = float(u_elements(model, l, p, p))
    return PhaseShiftResult("unitary", 1, -(math.pi * m / p) * lam * u, 1e-15 * abs(lam * u))


def delta2(model: PotentialModel, l: int, p: float, m: float, lam: float | None = None,
           quad_cfg: QuadConfig = DEFAULT_QUAD) -> PhaseShiftResult:
    """Second-order phase shift by principal-value quadrature plus tail.

    ``lam`` defaults to the model's own coupling.
    """
    lam = model.lam if lam is None else lam
    if lam == 0:
        return PhaseShiftResult("unitary", 2, 0.0, 0.0, {})
    k_cut = quad_cfg.k_cut(p, model)
    if not k_cut > p:
        raise ValueError(f"k_cut = {k_cut:g} must exceed p = {p:g}")

    def f(k):
        u = u_elements(model, l, k, p, k_max=max(k_cut, np.max(k)) + p)
        return u * u / (k * k - p * p)

    total, diag = _pv_plus_tail(f, p, 0.0, k_cut, model, quad_cfg, quad_cfg.tol_abs * 1e-2)
    pref = 2.0 * math.pi * m * m * lam * lam / p
    return PhaseShiftResult("unitary", 2, pref * total.value, pref * total.error_estimate, diag)


def _first_order_values(model, l, p, m, lam, r, cfg: QuadConfig):
    free = free_regular(l, p, r)
    if lam == 0 or r.size == 0:
        return np.array(free, dtype=float, copy=True), {"pv_window": None, "tail_bound": 0.0}
    k_cut = cfg.k_cut(p, model)
    kmax = k_cut + p

    def f(k):
        u = u_elements(model, l, k, p, k_max=kmax)
        g = 2.0 * m * u / (k * k - p * p)
        return free_regular(l, 1.0, np.multiply.outer(k, r)) * g[:, None]

    spec = PVSpec(p, 0.0, k_cut, cfg.tol_abs, cfg.pv_window)
    core = pv_integrate(f, spec)
    # The k-integrand mixes the frequencies r and r_max, so no single panel
    # period fits the tail; it is truncated and bounded instead.
    ks = k_cut + np.linspace(0.0, 2.0 * math.pi / model.r_max, 33)
    env = float(np.max(np.abs(u_elements(model, l, ks, p, k_max=ks[-1] + p))))
    tail_bound = SQRT_2_OVER_PI * 2.0 * m * env * math.log((k_cut + p) / (k_cut - p)) / (2 * p)
    values = free - lam * np.asarray(core.value)
    values[r == 0] = 0.0
    return values, {
        "pv_window": spec.half_width,
        "k_cut": k_cut,
        "core_error": abs(lam) * core.error_estimate,
        "tail_bound": abs(lam) * tail_bound,
        "evaluations": core.evaluations,
    }


def first_order_wavefunction(model: PotentialModel, l: int, p: float, m: float,
                             lam: float | None, r_grid=None,
                             quad_cfg: QuadConfig = DEFAULT_QUAD) -> PerturbativeWavefunction:
    """Order-``lam`` unitarily transformed solution sampled on ``r_grid``.

    ``lam=None`` takes the model's own coupling.  Without ``r_grid`` nothing
    is sampled and the result is only used as a callable.
    """
    model.check_admissible()
    lam = model.lam if lam is None else lam
    if r_grid is None:
        _, diag = _first_order_values(model, l, p, m, lam, np.array([1.0]), quad_cfg)
        return PerturbativeWavefunction(p, None, diag, model, l, m, lam, quad_cfg)
    r = np.asarray(r_grid, dtype=float)
    values, diag = _first_order_values(model, l, p, m, lam, r, quad_cfg)
    wf = RadialWavefunction(r, values, p, l, model.r_max, {"method": "unitary1"})
    return PerturbativeWavefunction(p, wf, diag, model, l, m, lam, quad_cfg)


# ---------------------------------------------------------------------------
# discrete generator


def momentum_grid(n: int, k_cut: float, avoid: float | None = None):
    """``n`` Gauss-Legendre nodes and weights on ``(0, k_cut]``.

    If a node falls within ``1e-9`` of ``avoid`` the rule is shifted by a
    fraction of the local spacing, keeping the on-shell point off the grid.
    """
    k, w = gauss_legendre(n, 0.0, k_cut)
    if avoid is not None:
        d = np.abs(k - avoid)
        i = int(np.argmin(d))
        if d[i] < 1e-9 * max(1.0, avoid):
            gap = np.min(np.abs(np.diff(k)))
            k = k + 0.25 * gap
    return k, w


def build_discrete_generator(kernel: KernelMatrix, m: float) -> KernelMatrix:
    """Discrete ``Theta1``: ``2m U~_ij / (k_i^2 - k_j^2)`` off the diagonal, 0 on it.

    ``U~_ij = sqrt(w_i) U_ij sqrt(w_j)``.  Entries are the real antisymmetric
    coefficient of ``-i``; the Hermitian matrix is ``-1j * entries``.
    """
    if kernel.symmetry_defect() > 1e-13 * max(1.0, float(np.max(np.abs(kernel.entries)))):
        raise ValueError("kernel is not symmetric")
    ut = kernel.weighted_entries()
    k2 = kernel.grid**2
    diff = k2[:, None] - k2[None, :]
    np.fill_diagonal(diff, 1.0)
    theta = np.triu(2.0 * m * ut / diff, 1)
    # mirror the upper triangle so antisymmetry is exact, not just to round-off
    theta = theta - theta.T
    return KernelMatrix(kernel.grid, kernel.weights, theta, diagonal_excluded=True,
                        weighted=True, meta={"order": 1, "m": m, "convention": "coefficient of -i"})


def generator_matrix(theta: KernelMatrix) -> np.ndarray:
    """The Hermitian matrix ``-i * entries``."""
    return -1j * theta.entries


def free_hamiltonian(grid, m: float) -> np.ndarray:
    return np.diag(np.asarray(grid, dtype=float) ** 2 / (2.0 * m))


def unitarity_defect(theta: KernelMatrix, lam: float) -> float:
    """``|| exp(-i lam Theta) exp(-i lam Theta)^dagger - 1 ||_2``."""
    u = expm(-1j * lam * generator_matrix(theta))
    return float(np.linalg.norm(u @ u.conj().T - np.eye(theta.size), 2))


def _offdiag(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    np.fill_diagonal(out, 0.0)
    return out


def transformed_hamiltonian_residual(kernel: KernelMatrix, theta: KernelMatrix,
                                     lam: float, m: float) -> float:
    """Frobenius norm of the off-diagonal part of ``U H U^dagger - (H + lam U~)``.

    The diagonal is left out: ``lam U~_ii`` is the first-order energy shift,
    which no unitary transformation of ``H`` can produce.
    """
    h = free_hamiltonian(kernel.grid, m)
    u = expm(-1j * lam * generator_matrix(theta))
    t = u @ h @ u.conj().T
    return float(np.linalg.norm(_offdiag(t - h - lam * kernel.weighted_entries())))


def commutator_residual(kernel: KernelMatrix, theta: KernelMatrix, m: float) -> float:
    """Largest off-diagonal ``|(i [H, Theta])_ij - U~_ij|``."""
    h = free_hamiltonian(kernel.grid, m)
    t = generator_matrix(theta)
    comm = 1j * (h @ t - t @ h)
    return float(np.max(np.abs(_offdiag(comm - kernel.weighted_entries()))))


def first_order_norm(theta: KernelMatrix, lam: float, j: int) -> float:
    """Squared norm of ``(1 - i lam Theta) e_j``."""
    e = np.zeros(theta.size, dtype=complex)
    e[j] = 1.0
    v = e - 1j * lam * (generator_matrix(theta) @ e)
    return float(np.vdot(v, v).real)


def norm_expansion(theta: KernelMatrix, lam: float, j: int) -> tuple[float, float]:
    """Linear and quadratic coefficients of ``||(1 - i lam Theta) e_j||^2`` in ``lam``."""
    plus = first_order_norm(theta, lam, j)
    minus = first_order_norm(theta, -lam, j)
    return (plus - minus) / (2 * lam), (plus + minus - 2.0) / (2 * lam * lam)


def discrete_theta2(kernel: KernelMatrix, theta: KernelMatrix, m: float) -> np.ndarray:
    """Coefficient of ``-i`` in the discrete ``Theta2`` solving ``[H, Theta2] = [Theta1, U~]``.

    Returned unweighted (divided by ``sqrt(w_i w_j)``) for comparison with
    :func:`theta2`; the diagonal is zero.
    """
    ut = kernel.weighted_entries()
    e1 = theta.entries
    comm = e1 @ ut - ut @ e1
    energy = kernel.grid**2 / (2.0 * m)
    diff = energy[:, None] - energy[None, :]
    np.fill_diagonal(diff, 1.0)
    out = comm / diff
    np.fill_diagonal(out, 0.0)
    s = np.sqrt(kernel.weights)
    return out / (s[:, None] * s[None, :])


def theta2_consistency_residual(model: PotentialModel, l: int, m: float, k_cut: float,
                                n_nodes: int, targets, quad_cfg: QuadConfig | None = None) -> float:
    """Largest absolute gap between discrete and continuum ``Theta2``.

    For each target pair ``(k1, k2)`` the nearest grid nodes are used; the
    continuum element is integrated over ``(0, k_cut]`` like the grid.  The
    discrete principal value (omitting the pole node) converges like
    ``1/n_nodes``.
    """
    k, w = momentum_grid(n_nodes, k_cut)
    kern = build_kernel(model, l, k, w)
    th = build_discrete_generator(kern, m)
    d2 = discrete_theta2(kern, th, m)
    cfg = quad_cfg or QuadConfig(k_cut_over_p=None, tail=False)
    worst = 0.0
    for a, b in targets:
        i = int(np.argmin(np.abs(k - a)))
        j = int(np.argmin(np.abs(k - b)))
        if i == j:
            raise ValueError(f"targets {a}, {b} map to the same node")
        hi = max(k[i], k[j])
        local = QuadConfig(k_cut_over_p=k_cut / hi, pv_window=cfg.pv_window,
                           tol_abs=cfg.tol_abs, tail=False)
        cont = theta2(model, l, float(k[i]), float(k[j]), m, local).value
        worst = max(worst, abs(d2[i, j] - cont))
    return worst
