"""
Potential models and their matrix elements between free partial waves.

A model supplies the shape ``U(r)`` of ``V(r) = lam * U(r)`` together with
metadata describing its range and its behaviour at the origin.  Phase-shift
methods accept a model only if it falls off faster than ``1/r`` and diverges
at the origin more slowly than ``1/r**2``.

The free-basis matrix element is

    U_l(k1, k2) = int_0^inf dr  ybar_l(r, k1) U(r) ybar_l(r, k2)

with the delta-normalized regular solutions of :mod:`phaseshift.specfun`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quadrature import PanelRule, integrate_adaptive
from .specfun import free_regular, sinc


class InadmissiblePotentialError(ValueError):
    """The potential decays too slowly or is too singular at the origin."""


RANGE_CLASSES = ("finite", "exponential", "power")


class PotentialModel:
    """Base class for radial potentials ``V(r) = lam * U(r)``.

    Subclasses implement :meth:`shape` and set the metadata attributes.

    Attributes
    ----------
    lam : float
        Coupling.
    range_class : str
        ``"finite"``, ``"exponential"`` or ``"power"``.
    scale : float
        Range for finite models, decay length for exponential ones and the
        reference radius for power laws.
    decay_power : float
        Exponent ``alpha`` of a ``r**-alpha`` tail (``inf`` otherwise).
    origin_exponent : float
        ``s`` in ``U ~ r**-s`` as ``r -> 0`` (0 for regular shapes).
    """

    kind = "generic"
    range_class = "finite"
    decay_power = math.inf
    origin_exponent = 0.0

    def __init__(self, lam: float, scale: float):
        if not scale > 0:
            raise ValueError(f"potential scale must be positive, got {scale}")
        self.lam = float(lam)
        self.scale = float(scale)

    def shape(self, r):
        raise NotImplementedError

    def evaluate(self, r):
        """``V(r) = lam * U(r)``."""
        return self.lam * self.shape(r)

    def __call__(self, r):
        return self.evaluate(r)

    def with_coupling(self, lam: float) -> "PotentialModel":
        """Same shape with a different coupling."""
        raise NotImplementedError

    @property
    def r_max(self) -> float:
        """Radius beyond which ``V`` is zero (finite) or negligible."""
        if self.range_class == "finite":
            return self.scale
        if self.range_class == "exponential":
            return 8.0 * self.scale
        raise InadmissiblePotentialError(
            f"{self.kind} potential has no finite support for numerical integration"
        )

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Radii where ``U`` or its derivatives jump."""
        return ()

    def check_admissible(self) -> None:
        """Raise :class:`InadmissiblePotentialError` for unsupported models."""
        if self.range_class not in RANGE_CLASSES:
            raise InadmissiblePotentialError(f"unknown range class {self.range_class!r}")
        if self.range_class == "power" and self.decay_power <= 1.0:
            raise InadmissiblePotentialError(
                f"potential decays like r^-{self.decay_power:g}; phase shifts "
                "require decay faster than 1/r"
            )
        if self.origin_exponent >= 2.0:
            raise InadmissiblePotentialError(
                f"potential diverges like r^-{self.origin_exponent:g} at the "
                "origin; at most r^-2 (exclusive) is allowed"
            )

    def closed_form(self, l: int, k1, k2):
        """Analytic ``U_l(k1, k2)`` if the model has one, else ``None``."""
        return None

    def describe(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "scale": self.scale}


class SquareWell(PotentialModel):
    """``V = lam / R`` on ``0 <= r <= R`` and zero outside.

    ``lam < 0`` is a well and ``lam > 0`` a barrier; both are the same model.
    """

    kind = "well"
    range_class = "finite"

    def __init__(self, R: float = 1.0, lam: float = 0.0):
        super().__init__(lam, R)

    @property
    def R(self) -> float:
        return self.scale

    def shape(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.R, 1.0 / self.R, 0.0)
        return float(out) if out.ndim == 0 else out

    def with_coupling(self, lam: float) -> "SquareWell":
        return SquareWell(self.R, lam)

    @property
    def breakpoints(self):
        return (self.R,)

    def closed_form(self, l: int, k1, k2):
        if l != 0:
            return None
        return matrix_element_well_s(self.R, k1, k2)


class GaussianBump(PotentialModel):
    """``V = lam * exp(-r**2 / (2 w**2)) / w``.

    A smooth model with no closed-form matrix element, used to exercise the
    numerical matrix-element path.
    """

    kind = "gaussian"
    range_class = "exponential"

    def __init__(self, width: float = 1.0, lam: float = 0.0):
        super().__init__(lam, width)

    @property
    def width(self) -> float:
        return self.scale

    def shape(self, r):
        r = np.asarray(r, dtype=float)
        out = np.exp(-0.5 * (r / self.width) ** 2) / self.width
        return float(out) if out.ndim == 0 else out

    def with_coupling(self, lam: float) -> "GaussianBump":
        return GaussianBump(self.width, lam)


class PowerLaw(PotentialModel):
    """``V = lam * (a / r)**alpha / a``; ``alpha = 1`` is Coulomb-like.

    Only used for admissibility decisions: it has no finite support, so the
    numerical methods reject it even when the decay is fast enough.
    """

    kind = "power"
    range_class = "power"

    def __init__(self, alpha: float, lam: float = 0.0, a: float = 1.0):
        super().__init__(lam, a)
        self.alpha = float(alpha)
        self.decay_power = self.alpha
        self.origin_exponent = self.alpha

    def shape(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = (self.scale / r) ** self.alpha / self.scale
        return float(out) if out.ndim == 0 else out

    def with_coupling(self, lam: float) -> "PowerLaw":
        return PowerLaw(self.alpha, lam, self.scale)


class ZeroPotential(PotentialModel):
    """``V = 0`` everywhere."""

    kind = "zero"
    range_class = "finite"

    def __init__(self, R: float = 1.0):
        super().__init__(0.0, R)

    def shape(self, r):
        out = np.zeros_like(np.asarray(r, dtype=float))
        return float(out) if out.ndim == 0 else out

    def with_coupling(self, lam: float) -> "ZeroPotential":
        return ZeroPotential(self.scale)

    def closed_form(self, l: int, k1, k2):
        out = np.zeros(np.broadcast(np.asarray(k1), np.asarray(k2)).shape)
        return float(out) if out.ndim == 0 else out


def make_model(kind: str, *, R: float = 1.0, lam: float = 0.0,
               width: float = 1.0) -> PotentialModel:
    """Model factory for the names accepted in configuration files."""
    kind = kind.strip().lower()
    if kind in ("well", "barrier", "square"):
        return SquareWell(R, lam)
    if kind == "gaussian":
        return GaussianBump(width, lam)
    if kind in ("zero", "none", "free"):
        return ZeroPotential(R)
    raise ValueError(f"unknown potential kind {kind!r} (expected well, barrier or gaussian)")


def matrix_element_well_s(R: float, k1, k2):
    """s-wave matrix element of the square shape ``U = 1/R`` on ``[0, R]``.

    ``(1/pi) * [sinc((k1 - k2) R) - sinc((k1 + k2) R)]``
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    out = (sinc((k1 - k2) * R) - sinc((k1 + k2) * R)) / np.pi
    return float(out) if np.ndim(out) == 0 else out


def _radial_limits(model: PotentialModel) -> tuple[float, float, tuple]:
    model.check_admissible()
    r_max = model.r_max
    return 0.0, r_max, tuple(b for b in model.breakpoints if 0 < b < r_max)


def matrix_element(model: PotentialModel, l: int, k1: float, k2: float,
                   tol: float = 1e-12) -> float:
    """``U_l(k1, k2)`` by adaptive position-space quadrature.

    The coupling is divided out.  The integrand is symmetrized in
    ``k1 <-> k2`` so the result is exactly symmetric.
    """
    if k1 <= 0 or k2 <= 0:
        raise ValueError("momenta must be positive")
    lo, hi, bps = _radial_limits(model)
    ka, kb = sorted((float(k1), float(k2)))

    def f(r):
        return free_regular(l, ka, r) * model.shape(r) * free_regular(l, kb, r)

    edges = (lo,) + bps + (hi,)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        # split long intervals so the adaptive rule sees a few periods at a time
        n = max(1, int(math.ceil((ka + kb) * (b - a) / (8 * math.pi))))
        for j in range(n):
            total += integrate_adaptive(
                f, a + (b - a) * j / n, a + (b - a) * (j + 1) / n, tol / n
            ).value
    return float(total)


@lru_cache(maxsize=64)
def _rule_for(model_key, lo: float, hi: float, bps: tuple, k_max: float) -> PanelRule:
    max_width = min(hi - lo, 2.0 * math.pi / max(k_max, 1e-12))
    return PanelRule.covering(lo, hi, max_width, breakpoints=bps, n_nodes=24)


def matrix_elements(model: PotentialModel, l: int, k, p, *, k_max: float | None = None):
    """Vectorized numeric ``U_l(k, p)`` on a fixed composite Gauss rule.

    ``k`` and ``p`` broadcast against each other.  The rule resolves
    oscillations up to ``k + p <= k_max`` (default: the largest pair given),
    with 24 nodes per panel of width at most one period.
    """
    k = np.asarray(k, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(k <= 0) or np.any(p <= 0):
        raise ValueError("momenta must be positive")
    lo, hi, bps = _radial_limits(model)
    kk, pp = np.broadcast_arrays(k, p)
    if k_max is None:
        k_max = float(np.max(kk + pp)) if kk.size else 1.0
    rule = _rule_for((model.kind, model.scale), lo, hi, bps, float(k_max))
    r = rule.nodes
    wu = rule.weights * model.shape(r)
    ya = free_regular(l, 1.0, np.multiply.outer(kk.ravel(), r))
    yb = free_regular(l, 1.0, np.multiply.outer(pp.ravel(), r))
    out = np.einsum("ij,ij,j->i", ya, yb, wu).reshape(kk.shape)
    return float(out) if out.ndim == 0 else out


def u_elements(model: PotentialModel, l: int, k, p, *, k_max: float | None = None):
    """``U_l(k, p)``: closed form when the model has one, numeric otherwise."""
    model.check_admissible()
    closed = model.closed_form(l, k, p)
    if closed is not None:
        return closed
    return matrix_elements(model, l, k, p, k_max=k_max)


@dataclass
class KernelMatrix:
    """A momentum-space matrix on a quadrature grid.

    Attributes
    ----------
    grid, weights : ndarray
        Momentum nodes ``k_i`` and their quadrature weights.
    entries : ndarray
        ``M(k_i, k_j)``.
    diagonal_excluded : bool
        Principal-part marker; when set the diagonal is exactly zero.
    weighted : bool
        Whether entries already include ``sqrt(w_i w_j)``.
    """

    grid: np.ndarray
    weights: np.ndarray
    entries: np.ndarray
    diagonal_excluded: bool = False
    weighted: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.entries = np.asarray(self.entries)
        n = self.grid.size
        if self.weights.shape != (n,) or self.entries.shape != (n, n):
            raise ValueError("grid, weights and entries have inconsistent shapes")
        if self.diagonal_excluded and np.any(np.diag(self.entries) != 0):
            raise ValueError("diagonal_excluded kernel has non-zero diagonal entries")

    @property
    def size(self) -> int:
        return self.grid.size

    def weighted_entries(self) -> np.ndarray:
        """``sqrt(w_i) M_ij sqrt(w_j)`` (unchanged if already weighted)."""
        if self.weighted:
            return self.entries
        s = np.sqrt(self.weights)
        return s[:, None] * self.entries * s[None, :]

    def symmetry_defect(self) -> float:
        """Largest ``|M_ij - M_ji|``."""
        return float(np.max(np.abs(self.entries - self.entries.T))) if self.size else 0.0


def build_kernel(model: PotentialModel, l: int, grid, weights=None) -> KernelMatrix:
    """Fill ``U_l(k_i, k_j)`` on ``grid``.

    Only the upper triangle is computed; the lower one is mirrored, so the
    result is exactly symmetric.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and positive")
    weights = np.ones_like(grid) if weights is None else np.asarray(weights, dtype=float)
    n = grid.size
    iu, ju = np.triu_indices(n)
    upper = np.asarray(u_elements(model, l, grid[iu], grid[ju],
                                  k_max=2.0 * float(grid[-1])), dtype=float)
    entries = np.zeros((n, n))
    entries[iu, ju] = upper
    entries[ju, iu] = upper
    return KernelMatrix(grid, weights, entries, meta={"model": model.describe(), "l": l})
