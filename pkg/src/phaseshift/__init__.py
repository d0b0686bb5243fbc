"""Partial-wave phase shifts by unitary perturbation theory and cross-checks."""

__version__ = "0.1.0"

from .params import DimensionlessGroups, ScatteringParams, derive_dimensionless  # noqa: E402
from .potential import GaussianBump, PowerLaw, SquareWell, ZeroPotential, make_model  # noqa: E402

__all__ = [
    "__version__",
    "DimensionlessGroups",
    "GaussianBump",
    "PowerLaw",
    "ScatteringParams",
    "SquareWell",
    "ZeroPotential",
    "derive_dimensionless",
    "make_model",
]
