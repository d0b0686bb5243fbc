"""
Scattering parameters and the dimensionless groups that control them.

Natural units with hbar = 1.  The coupling ``lam`` carries units of
energy x length so that a square potential of range ``R`` has depth
``lam / R``; a negative ``lam`` is attractive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ScatteringParams:
    """Mass, range, coupling, angular momentum and momentum of one problem.

    Parameters
    ----------
    m : float
        Reduced mass, ``m > 0``.
    R : float
        Range of the potential, ``R > 0``.
    lam : float
        Coupling strength; ``V = lam * U``.
    l : int
        Partial wave, ``l >= 0``.
    p : float
        Asymptotic momentum, ``p > 0``.
    """

    m: float = 1.0
    R: float = 1.0
    lam: float = 0.0
    l: int = 0
    p: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not self.R > 0:
            raise ValueError(f"range must be positive, got {self.R}")
        if not self.p > 0:
            raise ValueError(f"momentum must be positive, got {self.p}")
        if int(self.l) != self.l or self.l < 0:
            raise ValueError(f"l must be a non-negative integer, got {self.l}")
        if not math.isfinite(self.lam):
            raise ValueError("coupling must be finite")

    @classmethod
    def from_dimensionless(cls, kappa: float, eta: float, m: float = 1.0,
                           R: float = 1.0, l: int = 0) -> "ScatteringParams":
        """Build parameters from ``kappa = p R`` and ``eta = lam m / p``."""
        p = kappa / R
        return cls(m=m, R=R, lam=eta * p / m, l=l, p=p)

    @property
    def kappa(self) -> float:
        return self.p * self.R

    @property
    def eta(self) -> float:
        return self.lam * self.m / self.p

    def with_(self, **changes) -> "ScatteringParams":
        """Copy with some fields replaced."""
        fields = dict(m=self.m, R=self.R, lam=self.lam, l=self.l, p=self.p)
        fields.update(changes)
        return ScatteringParams(**fields)


@dataclass(frozen=True)
class DimensionlessGroups:
    """``eta``, ``kappa`` and the interior momentum ``kappa_prime``.

    ``kappa_prime_sq = kappa**2 - 2 eta kappa`` is the squared interior
    momentum ``(p' R)**2`` of a square potential of depth ``lam / R``.
    When it is negative the interior solution is a real exponential:
    ``evanescent`` is set and ``kappa_prime`` holds ``sqrt(|kappa_prime_sq|)``,
    the magnitude of the imaginary branch.
    """

    eta: float
    kappa: float
    kappa_prime: float
    evanescent: bool
    kappa_prime_sq: float


def derive_dimensionless(params: ScatteringParams) -> DimensionlessGroups:
    """Dimensionless groups of ``params``.

    ``p'**2 = p**2 - 2 m V`` inside the potential, which gives
    ``kappa'**2 = kappa**2 - 2 eta kappa``.
    """
    eta = params.eta
    kappa = params.kappa
    kp2 = kappa * kappa - 2.0 * eta * kappa
    if params.lam == 0:
        kp2 = kappa * kappa
    return DimensionlessGroups(
        eta=eta,
        kappa=kappa,
        kappa_prime=math.sqrt(abs(kp2)),
        evanescent=kp2 < 0,
        kappa_prime_sq=kp2,
    )
