"""Classical four-dimensional map of the coupled rotors and the standard map.

Between kicks the center of mass rotates freely and the internal coordinate
bounces specularly between the walls at ``r = +-w``; the bounce is folded in
closed form (triangle wave of period ``4w``).  The kick derives from the
potential ``K cos R cos(r/2)``:

    P <- P + K sin R cos(r/2),    p <- p + (K/2) cos R sin(r/2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import kernels
from .observables import TimeSeries, classical_observer
from .params import ModelParams, derive_params

RNG_ALGORITHM = "Philox"
#: Observables are recorded after the kick of each period.
RECORDING = "after-kick"


@dataclass
class Particle:
    R: float
    P: float
    r: float
    p: float


@dataclass
class ClassicalEnsemble:
    R: np.ndarray
    P: np.ndarray
    r: np.ndarray
    p: np.ndarray
    params: ModelParams
    seed: int | None = None
    kick_count: int = 0

    def __post_init__(self):
        for name in ("R", "P", "r", "p"):
            setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float64))
        if self.R.ndim != 1 or self.R.size < 1:
            raise ValueError("an ensemble needs at least one particle")
        if not (self.R.shape == self.P.shape == self.r.shape == self.p.shape):
            raise ValueError("phase-space arrays differ in length")

    def __len__(self) -> int:
        return self.R.size

    def copy(self) -> ClassicalEnsemble:
        return ClassicalEnsemble(
            self.R.copy(), self.P.copy(), self.r.copy(), self.p.copy(), self.params, self.seed, self.kick_count
        )

    def particle(self, i: int) -> Particle:
        return Particle(float(self.R[i]), float(self.P[i]), float(self.r[i]), float(self.p[i]))


def _ground_state_cdf(r: np.ndarray, w: float) -> np.ndarray:
    return (r + w) / (2 * w) + np.sin(math.pi * r / w) / (2 * math.pi)


def sample_ensemble(params: ModelParams, count: int, seed: int, table_size: int = 1 << 14) -> ClassicalEnsemble:
    """Classical counterpart of the quantum initial state.

    R uniform on ``[0, 2 pi)``, ``P = 0``; r drawn from ``cos^2(pi r / 2w) / w``
    by inverse-CDF interpolation on a table of ``table_size`` nodes;
    ``p = +-pi hbar / 2w`` with equal probability.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    rng = np.random.Generator(np.random.Philox(seed))
    w = params.w
    R = rng.uniform(0.0, 2 * math.pi, count)
    nodes = np.linspace(-w, w, table_size)
    cdf = _ground_state_cdf(nodes, w)
    cdf[0], cdf[-1] = 0.0, 1.0
    r = np.interp(rng.random(count), cdf, nodes)
    p0 = math.pi * params.hbar / (2 * w)
    p = np.where(rng.integers(0, 2, count) == 1, p0, -p0)
    return ClassicalEnsemble(R, np.zeros(count), r, p, params, seed, 0)


def _map_constants(params: ModelParams) -> tuple[float, float]:
    return params.T / params.M, params.T / params.mu


def free_flight(particle: Particle, params: ModelParams) -> Particle:
    R, P, r, p = (np.array([v], dtype=np.float64) for v in (particle.R, particle.P, particle.r, particle.p))
    T_over_M, T_over_mu = _map_constants(params)
    kernels.free_flight(R, P, r, p, T_over_M, T_over_mu, params.w)
    return Particle(float(R[0]), float(P[0]), float(r[0]), float(p[0]))


def kick(particle: Particle, params: ModelParams) -> Particle:
    R, P, r, p = (np.array([v], dtype=np.float64) for v in (particle.R, particle.P, particle.r, particle.p))
    kernels.kick(R, P, r, p, params.K)
    return Particle(float(R[0]), float(P[0]), float(r[0]), float(p[0]))


def step_ensemble(ensemble: ClassicalEnsemble) -> ClassicalEnsemble:
    """One period (free flight, then kick) on a copy of ``ensemble``."""
    out = ensemble.copy()
    _advance(out, 1)
    return out


def _advance(ensemble: ClassicalEnsemble, steps: int) -> None:
    params = ensemble.params
    T_over_M, T_over_mu = _map_constants(params)
    kernels.coupled_steps(
        ensemble.R, ensemble.P, ensemble.r, ensemble.p, steps, T_over_M, T_over_mu, params.w, params.K
    )
    ensemble.kick_count += steps


def _advance_single(ensemble: ClassicalEnsemble, steps: int) -> None:
    params = ensemble.params
    kernels.standard_map_steps(ensemble.R, ensemble.P, steps, params.T / params.M, params.K)
    ensemble.kick_count += steps


def _evolve(ensemble, n, observer, every, advance) -> TimeSeries:
    if n < 0:
        raise ValueError(f"number of kicks must be non-negative, got {n}")
    if every < 1:
        raise ValueError(f"observer interval must be positive, got {every}")
    observer = observer or classical_observer()
    series = TimeSeries()
    target = ensemble.kick_count + n
    while ensemble.kick_count < target:
        next_stop = min((ensemble.kick_count // every + 1) * every, target)
        advance(ensemble, next_stop - ensemble.kick_count)
        series.append({"n": ensemble.kick_count, **observer(ensemble)})
    return series


def evolve_ensemble(
    ensemble: ClassicalEnsemble,
    n: int,
    observer: Callable[[ClassicalEnsemble], dict] | None = None,
    every: int = 1,
) -> TimeSeries:
    """Apply ``n`` periods of the coupled map in place, observing every ``every`` kicks and at the end."""
    return _evolve(ensemble, n, observer, every, _advance)


def evolve_standard_map(
    ensemble: ClassicalEnsemble,
    n: int,
    observer: Callable[[ClassicalEnsemble], dict] | None = None,
    every: int = 1,
) -> TimeSeries:
    """Single-rotor baseline: the standard map on ``(R, P)``; ``r`` and ``p`` are left untouched."""
    return _evolve(ensemble, n, observer, every, _advance_single)


def standard_map_step(R, P, params: ModelParams):
    """``R <- (R + P T / M) mod 2 pi``, then ``P <- P + K sin R``.  Scalars or arrays."""
    scalar = np.ndim(R) == 0
    R = np.array(R, dtype=np.float64, ndmin=1)
    P = np.array(P, dtype=np.float64, ndmin=1)
    kernels.standard_map_steps(R, P, 1, params.T / params.M, params.K)
    if scalar:
        return float(R[0]), float(P[0])
    return R, P


# --- snapshots --------------------------------------------------------------------


def save_snapshot(ensemble: ClassicalEnsemble, path: str | Path) -> Path:
    """Write ``R,P,r,p`` rows to ``path`` and metadata to ``path`` + ``.json``."""
    path = Path(path)
    data = np.column_stack([ensemble.R, ensemble.P, ensemble.r, ensemble.p])
    with open(path, "w") as fh:
        fh.write("R,P,r,p\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    meta = {
        "seed": ensemble.seed,
        "kick_count": ensemble.kick_count,
        "rng": RNG_ALGORITHM,
        "recording": RECORDING,
        "params": ensemble.params.as_dict(),
    }
    meta_path = path.with_name(path.name + ".json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta_path


def load_snapshot(path: str | Path) -> ClassicalEnsemble:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "R,P,r,p":
            raise ValueError(f"{path}: unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    params = derive_params(**meta["params"])
    return ClassicalEnsemble(data[:, 0], data[:, 1], data[:, 2], data[:, 3], params, meta["seed"], meta["kick_count"])
