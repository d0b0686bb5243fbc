"""
Run configuration: flat ``key = value`` files plus command-line overrides.

Recognized keys (defaults in parentheses)::

    potential.kind      well | barrier | gaussian | zero        (well)
                        (``potential = well`` is accepted as a shorthand)
    potential.R         range of the well/barrier              (1.0)
    potential.width     Gaussian width                          (1.0)
    potential.lambda    coupling lam (V = lam U)               (unset)
    potential.eta       dimensionless coupling lam m / p        (unset)
    potential.m         mass                                    (1.0)
    potential.l         partial wave                            (0)
    methods             comma list of unitary1, unitary2, green1, green2,
                        exact, numerov, wronskian              (exact,numerov)
    sweep.axis          kappa | p | lambda | eta                (kappa)
    sweep.start, sweep.stop, sweep.count                       (1, 10, 10)
    sweep.p             fixed momentum for lambda/eta sweeps   (1.0)
    quad.k_cut_over_p, quad.pv_window, quad.tol_abs, quad.grid_nodes
    numerov.hp          Numerov step times p                   (0.004)
    output.format       csv | json                             (csv)
    output.path         file path, '-' for stdout              (-)
    output.degrees      report angles in degrees               (false)
    output.r_max, output.r_count   radial grid of wavefunction dumps
    validate.tolerance_scale       multiplies every threshold  (1.0)
    validate.inject                none | kernel_asymmetry     (none)

Exactly one of ``potential.lambda`` and ``potential.eta`` may be given when
sweeping ``kappa`` or ``p``; neither may be given when sweeping the coupling.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .unitary import QuadConfig

METHODS = ("unitary1", "unitary2", "green1", "green2", "exact", "numerov", "wronskian")
AXES = ("kappa", "p", "lambda", "eta")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line."""


_DEFAULTS = {
    "potential.kind": "well",
    "potential.R": "1.0",
    "potential.width": "1.0",
    "potential.m": "1.0",
    "potential.l": "0",
    "methods": "exact,numerov",
    "sweep.axis": "kappa",
    "sweep.start": "1.0",
    "sweep.stop": "10.0",
    "sweep.count": "10",
    "sweep.p": "1.0",
    "numerov.hp": "0.004",
    "output.format": "csv",
    "output.path": "-",
    "output.degrees": "false",
    "validate.tolerance_scale": "1.0",
    "validate.inject": "none",
}

_OPTIONAL = {
    "potential.lambda", "potential.eta", "quad.k_cut_over_p", "quad.pv_window",
    "quad.tol_abs", "quad.grid_nodes", "output.r_max", "output.r_count",
}

_ALIASES = {"potential": "potential.kind"}

KNOWN_KEYS = frozenset(_DEFAULTS) | _OPTIONAL | frozenset(_ALIASES)


def parse_lines(lines, source: str, numbered: bool = True) -> list[tuple[str, str, str]]:
    """Parse ``key = value`` lines; returns ``(key, value, location)`` triples."""
    out = []
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        loc = f"{source}:{n}" if numbered else source
        if "=" not in line:
            raise ConfigError(f"{loc}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{loc}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"{loc}: empty value for {key!r}")
        out.append((key, value, loc))
    return out


def _float(raw: dict, locs: dict, key: str, positive: bool = False) -> float:
    try:
        v = float(raw[key])
    except ValueError:
        raise ConfigError(f"{locs.get(key, 'default')}: {key} must be a number, "
                          f"got {raw[key]!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{locs.get(key, 'default')}: {key} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{locs.get(key, 'default')}: {key} must be positive, got {v:g}")
    return v


def _int(raw: dict, locs: dict, key: str, minimum: int) -> int:
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{locs.get(key, 'default')}: {key} must be an integer, "
                          f"got {raw[key]!r}") from None
    if v < minimum:
        raise ConfigError(f"{locs.get(key, 'default')}: {key} must be >= {minimum}")
    return v


def _bool(raw: dict, locs: dict, key: str) -> bool:
    v = raw[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{locs.get(key, 'default')}: {key} must be true or false")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.  ``raw`` holds the canonical key/value map."""

    kind: str
    R: float
    width: float
    m: float
    l: int
    lam: float | None
    eta: float | None
    methods: tuple[str, ...]
    axis: str
    start: float
    stop: float
    count: int
    fixed_p: float
    hp: float
    quad: QuadConfig
    fmt: str
    path: str
    degrees: bool
    r_max: float | None
    r_count: int | None
    tolerance_scale: float
    inject: str
    raw: dict = field(default_factory=dict)

    @property
    def sweep_values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)

    def points(self):
        """Yield ``(p, lam)`` for every sweep point."""
        for x in self.sweep_values:
            x = float(x)
            if self.axis in ("kappa", "p"):
                p = x / self.R if self.axis == "kappa" else x
                lam = self.lam if self.lam is not None else (self.eta or 0.0) * p / self.m
            else:
                p = self.fixed_p
                lam = x if self.axis == "lambda" else x * p / self.m
            yield p, lam

    def canonical(self) -> str:
        return "\n".join(f"{k}={self.raw[k]}" for k in sorted(self.raw))

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    text = "\n".join(f"{k}={raw[k]}" for k in sorted(raw))
    return hashlib.sha256(text.encode()).hexdigest()


def build_config(entries: list[tuple[str, str, str]]) -> RunConfig:
    """Validate parsed entries (later entries override earlier ones)."""
    raw = dict(_DEFAULTS)
    locs: dict[str, str] = {}
    for key, value, loc in entries:
        key = _ALIASES.get(key, key)
        raw[key] = value
        locs[key] = loc

    kind = raw["potential.kind"].lower()
    if kind not in ("well", "barrier", "gaussian", "zero"):
        raise ConfigError(f"{locs.get('potential.kind', 'default')}: unknown potential "
                          f"{raw['potential.kind']!r} (well, barrier, gaussian, zero)")
    raw["potential.kind"] = kind
    R = _float(raw, locs, "potential.R", positive=True)
    width = _float(raw, locs, "potential.width", positive=True)
    m = _float(raw, locs, "potential.m", positive=True)
    l = _int(raw, locs, "potential.l", 0)
    if l > 10:
        raise ConfigError(f"{locs.get('potential.l')}: l must be <= 10")

    methods = tuple(s.strip().lower() for s in raw["methods"].split(",") if s.strip())
    bad = [s for s in methods if s not in METHODS]
    if bad or not methods:
        raise ConfigError(f"{locs.get('methods', 'default')}: unknown method(s) {bad} "
                          f"(choose from {', '.join(METHODS)})")
    if len(set(methods)) != len(methods):
        raise ConfigError(f"{locs.get('methods')}: duplicate methods")
    raw["methods"] = ",".join(methods)

    axis = raw["sweep.axis"].lower()
    if axis not in AXES:
        raise ConfigError(f"{locs.get('sweep.axis')}: sweep.axis must be one of {AXES}")
    raw["sweep.axis"] = axis
    start = _float(raw, locs, "sweep.start")
    stop = _float(raw, locs, "sweep.stop")
    count = _int(raw, locs, "sweep.count", 1)
    fixed_p = _float(raw, locs, "sweep.p", positive=True)
    if axis in ("kappa", "p"):
        for key, v in (("sweep.start", start), ("sweep.stop", stop)):
            if not v > 0 and not (key == "sweep.stop" and count == 1):
                raise ConfigError(f"{locs.get(key, 'default')}: {key} must be positive "
                                  f"for a {axis} sweep")

    lam = eta = None
    has_lam = "potential.lambda" in raw
    has_eta = "potential.eta" in raw
    if axis in ("kappa", "p"):
        if has_lam and has_eta:
            raise ConfigError(f"{locs['potential.eta']}: give either potential.lambda "
                              f"({locs['potential.lambda']}) or potential.eta, not both")
        if has_lam:
            lam = _float(raw, locs, "potential.lambda")
        elif has_eta:
            eta = _float(raw, locs, "potential.eta")
        else:
            lam = 0.0
    else:
        for key in ("potential.lambda", "potential.eta"):
            if key in raw:
                raise ConfigError(f"{locs[key]}: {key} conflicts with a {axis} sweep")

    hp = _float(raw, locs, "numerov.hp", positive=True)
    if hp >= math.pi / 8:
        raise ConfigError(f"{locs.get('numerov.hp')}: numerov.hp must be below pi/8")

    qkw = {}
    if "quad.k_cut_over_p" in raw:
        qkw["k_cut_over_p"] = _float(raw, locs, "quad.k_cut_over_p", positive=True)
    if "quad.pv_window" in raw:
        qkw["pv_window"] = _float(raw, locs, "quad.pv_window", positive=True)
    if "quad.tol_abs" in raw:
        qkw["tol_abs"] = _float(raw, locs, "quad.tol_abs", positive=True)
    if "quad.grid_nodes" in raw:
        qkw["grid_nodes"] = _int(raw, locs, "quad.grid_nodes", 2)
    try:
        quad = QuadConfig(**qkw)
    except ValueError as exc:
        raise ConfigError(f"quad: {exc}") from None

    fmt = raw["output.format"].lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"{locs.get('output.format')}: output.format must be csv or json")
    raw["output.format"] = fmt
    degrees = _bool(raw, locs, "output.degrees")
    r_max = _float(raw, locs, "output.r_max", positive=True) if "output.r_max" in raw else None
    r_count = _int(raw, locs, "output.r_count", 3) if "output.r_count" in raw else None
    tscale = _float(raw, locs, "validate.tolerance_scale", positive=True)
    inject = raw["validate.inject"].lower()
    if inject not in ("none", "kernel_asymmetry"):
        raise ConfigError(f"{locs.get('validate.inject')}: validate.inject must be none or "
                          "kernel_asymmetry")

    return RunConfig(kind, R, width, m, l, lam, eta, methods, axis, start, stop, count,
                     fixed_p, hp, quad, fmt, raw["output.path"], degrees, r_max, r_count,
                     tscale, inject, raw)


def load_config(path: str | None = None, overrides=()) -> RunConfig:
    """Read ``path`` (optional) and apply ``key=value`` overrides in order."""
    entries = []
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                entries += parse_lines(fh.read().splitlines(), path)
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    for i, item in enumerate(overrides, start=1):
        entries += parse_lines([item], f"--set[{i}]", numbered=False)
    return build_config(entries)
