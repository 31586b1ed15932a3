"""Physical and numerical parameters of the two-rotor model.

The two constituents (mass ``m`` each, kick strength ``k`` each) are mapped to
center-of-mass variables ``(R, P)`` and internal variables ``(r, p)`` with

    R = (r1 + r2) / 2,  r = r1 - r2,  P = p1 + p2,  p = (p1 - p2) / 2,

giving total mass ``M = 2m``, reduced mass ``mu = m / 2`` and center-of-mass
kick strength ``K = 2k``.  The internal coordinate lives in an infinite well
with walls at ``r = +-w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid parameter value or configuration key."""


@dataclass(frozen=True)
class ModelParams:
    """All model parameters.  Construct through :func:`derive_params`.

    Attributes:
        m: constituent mass.
        k: per-particle kick strength.
        T: kick period.
        hbar: effective Planck constant.
        w: confinement half-width, walls at ``r = +-w``.
        N_R: center-of-mass basis size (even).
        N_r: internal basis size.
        n_kicks: number of kicks to propagate.
        literal_kick: use the kick phase ``K cos R cos(r/2)`` without the
            ``1/hbar`` factor.  Off by default.
    """

    m: float
    k: float
    T: float
    hbar: float
    w: float
    N_R: int
    N_r: int
    n_kicks: int
    literal_kick: bool = False

    @property
    def M(self) -> float:
        return 2.0 * self.m

    @property
    def mu(self) -> float:
        return 0.5 * self.m

    @property
    def K(self) -> float:
        return 2.0 * self.k

    @property
    def kick_strength(self) -> float:
        """Coefficient of ``cos R cos(r/2)`` in the quantum kick phase."""
        return self.K if self.literal_kick else self.K / self.hbar

    def replace(self, **changes) -> ModelParams:
        """Copy with some fields changed; the result is validated again."""
        new = replace(self, **changes)
        _validate(new)
        return new

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _validate(p: ModelParams) -> None:
    for name in ("m", "T", "hbar", "w"):
        value = getattr(p, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be positive, got {value!r}")
    if not (math.isfinite(p.k) and p.k >= 0):
        raise ConfigError(f"k must be non-negative, got {p.k!r}")
    if p.w > math.pi:
        raise ConfigError(f"w must not exceed pi, got {p.w!r}")
    for name in ("N_R", "N_r"):
        value = getattr(p, name)
        if int(value) != value or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    if p.N_R % 2:
        raise ConfigError(f"N_R must be even, got {p.N_R}")
    if int(p.n_kicks) != p.n_kicks or p.n_kicks < 0:
        raise ConfigError(f"n_kicks must be a non-negative integer, got {p.n_kicks!r}")


def derive_params(
    m: float = 0.5,
    k: float = 2.5,
    T: float = 1.0,
    hbar: float = 0.07,
    w: float = 0.5,
    N_R: int = 16384,
    N_r: int = 256,
    n_kicks: int = 500,
    literal_kick: bool = False,
) -> ModelParams:
    """Build validated :class:`ModelParams`; ``M``, ``mu`` and ``K`` follow from ``m`` and ``k``.

    ``k = 0`` is accepted (free evolution); every other physical input must be
    positive and ``w`` may not exceed ``pi``.
    """
    params = ModelParams(
        m=float(m),
        k=float(k),
        T=float(T),
        hbar=float(hbar),
        w=float(w),
        N_R=int(N_R),
        N_r=int(N_r),
        n_kicks=int(n_kicks),
        literal_kick=bool(literal_kick),
    )
    _validate(params)
    return params


@dataclass(frozen=True)
class BoxSpectrum:
    """Infinite-well levels of the internal motion, ``n = 1..N_r``."""

    energies: np.ndarray
    w: float

    def eigenfunction(self, n: int, r: np.ndarray) -> np.ndarray:
        """``phi_n(r) = sin(n pi (r + w) / 2w) / sqrt(w)`` on ``[-w, w]``."""
        r = np.asarray(r, dtype=float)
        return np.sin(n * np.pi * (r + self.w) / (2 * self.w)) / math.sqrt(self.w)


def box_spectrum(params: ModelParams) -> BoxSpectrum:
    n = np.arange(1, params.N_r + 1, dtype=float)
    energies = n**2 * (math.pi**2 * params.hbar**2 / (8.0 * params.mu * params.w**2))
    return BoxSpectrum(energies=energies, w=params.w)


# --- configuration files ----------------------------------------------------

PARAM_KEYS = ("m", "k", "T", "hbar", "w", "N_R", "N_r", "n_kicks")
CONFIG_KEYS = PARAM_KEYS + (
    "seed",
    "output_dir",
    "mode",
    "n_particles",
    "record_every",
    "checkpoint_every",
    "sweep_param",
    "sweep_values",
    "fit_lo",
    "fit_hi",
    "svn",
    "literal_kick",
    "name",
)

_INT_KEYS = {"N_R", "N_r", "n_kicks", "seed", "n_particles", "record_every", "checkpoint_every", "fit_lo", "fit_hi"}
_BOOL_KEYS = {"svn", "literal_kick"}
_STR_KEYS = {"output_dir", "mode", "sweep_param", "name"}


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines.  ``#`` starts a comment; unknown keys are rejected.

    ``sweep_values`` is a comma-separated list of floats.
    """
    config: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = parts
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r} (line {lineno})")
        try:
            if key in _INT_KEYS:
                config[key] = int(value)
            elif key in _BOOL_KEYS:
                config[key] = _parse_bool(key, value)
            elif key in _STR_KEYS:
                config[key] = value
            elif key == "sweep_values":
                config[key] = [float(v) for v in value.split(",") if v.strip()]
            else:
                config[key] = float(value)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return config


def load_config(path: str | Path) -> dict:
    return parse_config(Path(path).read_text())


def params_from_config(config: dict, **overrides) -> ModelParams:
    """Built-in defaults, then config values, then keyword overrides."""
    values = {key: config[key] for key in PARAM_KEYS if key in config}
    if "literal_kick" in config:
        values["literal_kick"] = config["literal_kick"]
    values.update(overrides)
    return derive_params(**values)
