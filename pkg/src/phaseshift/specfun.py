"""
Spherical Bessel and Neumann functions and the free reduced radial solutions.

Small arguments (``x < max(0.1, l/2)``) use the ascending series for
``j_l``; elsewhere the closed trigonometric forms are carried upward by the
three-term recurrence.  Upward recurrence is stable for ``n_l`` and good to
roughly 1e-12 relative for ``j_l`` with ``l <= 10`` above the switchover,
which covers the supported range of angular momenta.

The free solutions are normalized to ``delta(k1 - k2)``::

    free_regular(l, k, r)   = sqrt(2/pi) * k r * j_l(k r)
    free_irregular(l, k, r) = sqrt(2/pi) * k r * n_l(k r)
"""

from __future__ import annotations

import numpy as np

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
L_MAX = 10

_SERIES_TERMS = 40


def _check_l(l: int, lmax: int = L_MAX) -> int:
    if int(l) != l or l < 0:
        raise ValueError(f"angular momentum must be a non-negative integer, got {l}")
    if l > lmax:
        raise ValueError(f"l = {l} exceeds the supported maximum {L_MAX}")
    return int(l)


def _double_factorial_odd(l: int) -> float:
    """(2l+1)!!"""
    out = 1.0
    for n in range(3, 2 * l + 2, 2):
        out *= n
    return out


def _j_series(l: int, x: np.ndarray) -> np.ndarray:
    # j_l(x) = x^l/(2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    term = np.ones_like(x)
    total = np.ones_like(x)
    z = -0.5 * x * x
    for k in range(1, _SERIES_TERMS):
        term = term * z / (k * (2 * l + 2 * k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return x**l / _double_factorial_odd(l) * total


def _upward(l: int, x: np.ndarray, f0: np.ndarray, f1: np.ndarray) -> np.ndarray:
    if l == 0:
        return f0
    prev, cur = f0, f1
    for n in range(1, l):
        prev, cur = cur, (2 * n + 1) / x * cur - prev
    return cur


def sinc(x):
    """``sin(x)/x`` with a Taylor branch near the origin."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def spherical_bessel_j(l: int, x):
    """Spherical Bessel function ``j_l(x)`` for real ``x``."""
    return _bessel_j(_check_l(l), x)


def _bessel_j(l: int, x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < max(0.1, 0.5 * l)
    out = np.empty_like(ax)
    if np.any(small):
        out[small] = _j_series(l, ax[small])
    big = ~small
    if np.any(big):
        xb = ax[big]
        s, c = np.sin(xb), np.cos(xb)
        j0 = s / xb
        j1 = s / (xb * xb) - c / xb
        out[big] = _upward(l, xb, j0, j1)
    # j_l has parity (-1)^l
    if l % 2:
        out = np.where(x < 0, -out, out)
    return float(out) if out.ndim == 0 else out


def spherical_neumann_n(l: int, x):
    """Spherical Neumann function ``n_l(x)``, defined for ``x > 0``."""
    return _neumann_n(_check_l(l), x)


def _neumann_n(l: int, x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("spherical_neumann_n is singular for x <= 0")
    s, c = np.sin(x), np.cos(x)
    n0 = -c / x
    n1 = -c / (x * x) - s / x
    out = _upward(l, x, n0, n1)
    return float(out) if np.ndim(out) == 0 else out


def spherical_bessel_j_deriv(l: int, x):
    """``d j_l / dx``."""
    l = _check_l(l)
    if l == 0:
        return -_bessel_j(1, x)
    # j_l' = (l j_{l-1} - (l+1) j_{l+1}) / (2l+1), regular at x = 0
    return (l * _bessel_j(l - 1, x) - (l + 1) * _bessel_j(l + 1, x)) / (2 * l + 1)


def spherical_neumann_n_deriv(l: int, x):
    """``d n_l / dx`` for ``x > 0``."""
    l = _check_l(l)
    if np.any(np.asarray(x) <= 0):
        raise ValueError("spherical_neumann_n is singular for x <= 0")
    if l == 0:
        return -_neumann_n(1, x)
    return _neumann_n(l - 1, x) - (l + 1) / np.asarray(x, dtype=float) * _neumann_n(l, x)


def free_regular(l: int, k: float, r):
    """Regular free solution ``sqrt(2/pi) k r j_l(k r)``; vanishes at ``r = 0``."""
    if np.any(np.asarray(k) <= 0):
        raise ValueError("momentum must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    x = k * r
    if l == 0:
        out = SQRT_2_OVER_PI * np.sin(x)
    else:
        out = SQRT_2_OVER_PI * x * spherical_bessel_j(l, x)
    return float(out) if np.ndim(out) == 0 else out


def free_irregular(l: int, k: float, r):
    """Irregular free solution ``sqrt(2/pi) k r n_l(k r)``; requires ``r > 0``."""
    if np.any(np.asarray(k) <= 0):
        raise ValueError("momentum must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("the irregular free solution is undefined at r <= 0")
    x = k * r
    if l == 0:
        out = -SQRT_2_OVER_PI * np.cos(x)
    else:
        out = SQRT_2_OVER_PI * x * spherical_neumann_n(l, x)
    return float(out) if np.ndim(out) == 0 else out


def free_regular_deriv(l: int, k: float, r):
    """``d/dr`` of :func:`free_regular`."""
    r = np.asarray(r, dtype=float)
    x = k * r
    if l == 0:
        return SQRT_2_OVER_PI * k * np.cos(x)
    return SQRT_2_OVER_PI * k * (spherical_bessel_j(l, x) + x * spherical_bessel_j_deriv(l, x))


def free_irregular_deriv(l: int, k: float, r):
    """``d/dr`` of :func:`free_irregular`."""
    r = np.asarray(r, dtype=float)
    x = k * r
    if l == 0:
        return SQRT_2_OVER_PI * k * np.sin(x)
    return SQRT_2_OVER_PI * k * (spherical_neumann_n(l, x) + x * spherical_neumann_n_deriv(l, x))
