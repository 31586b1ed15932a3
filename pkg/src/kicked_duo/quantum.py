"""Split-operator Floquet map for the coupled rotors and the single-rotor baseline.

One period is a free step, diagonal in ``MOM_LEVEL``, followed by the kick,
diagonal in ``POS_POS``.  Observables are taken just after the kick.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.fft as sfft

from . import hilbert
from .hilbert import QuantumState, Rep, as_rep, grids, save_checkpoint
from .observables import TimeSeries, quantum_observer
from .params import ModelParams, box_spectrum

log = logging.getLogger(__name__)

#: ``|l| >= GUARD_FRACTION * N_R`` is the band next to the wrap-around edge.
GUARD_FRACTION = 0.375
#: Probability allowed in the edge band before a run is aborted.
GUARD_TOL = 1e-2


class AliasingError(RuntimeError):
    """Momentum support reached the edge of the grid."""

    def __init__(self, kick: int, tail: float, limit: int):
        super().__init__(
            f"momentum support too wide at kick {kick}: probability {tail:.3g} at |l| >= {limit}; "
            "increase N_R"
        )
        self.kick = kick
        self.tail = tail


@dataclass(frozen=True)
class FreePhases:
    com_phase: np.ndarray  # over l, FFT order
    int_phase: np.ndarray  # over n = 1..N_r

    def table(self) -> np.ndarray:
        return np.multiply.outer(self.com_phase, self.int_phase)


@dataclass(frozen=True)
class KickPhases:
    phase: np.ndarray  # (N_R, N_r) on the position grid


def free_phases(params: ModelParams) -> FreePhases:
    g = grids(params)
    l = g.l.astype(float)
    com = np.exp(-1j * params.hbar * l**2 * params.T / (2.0 * params.M))
    energies = box_spectrum(params).energies
    internal = np.exp(-1j * energies * params.T / params.hbar)
    return FreePhases(com, internal)


def kick_phases(params: ModelParams) -> KickPhases:
    g = grids(params)
    arg = params.kick_strength * np.multiply.outer(np.cos(g.R), np.cos(g.r / 2.0))
    return KickPhases(np.exp(-1j * arg))


class Propagator:
    """Cached phase tables for one parameter set."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.free = free_phases(params)
        self.kick = kick_phases(params)
        self._free_table = self.free.table()

    def free_step(self, state: QuantumState) -> QuantumState:
        out = as_rep(state, Rep.MOM_LEVEL)
        coeffs = out.coeffs * self._free_table
        return QuantumState(coeffs, Rep.MOM_LEVEL, state.params, state.kick_count)

    def kick_step(self, state: QuantumState) -> QuantumState:
        out = as_rep(state, Rep.POS_POS)
        coeffs = out.coeffs * self.kick.phase
        return QuantumState(coeffs, Rep.POS_POS, state.params, state.kick_count + 1)

    def floquet_step(self, state: QuantumState) -> QuantumState:
        """One period; the result is returned in ``MOM_LEVEL``."""
        return hilbert.to_mom_level(self.kick_step(self.free_step(state)))

    def _step_array(self, c: np.ndarray) -> np.ndarray:
        # MOM_LEVEL in, MOM_LEVEL out; c is not modified.  The sqrt(weight)
        # factors of the two transforms cancel.
        psi = c * self._free_table
        psi = sfft.ifft(psi, axis=0, norm="ortho", overwrite_x=True, workers=hilbert.FFT_WORKERS)
        psi = sfft.dst(psi, type=1, axis=1, norm="ortho", overwrite_x=True, workers=hilbert.FFT_WORKERS)
        psi *= self.kick.phase
        psi = sfft.dst(psi, type=1, axis=1, norm="ortho", overwrite_x=True, workers=hilbert.FFT_WORKERS)
        return sfft.fft(psi, axis=0, norm="ortho", overwrite_x=True, workers=hilbert.FFT_WORKERS)


@lru_cache(maxsize=8)
def propagator(params: ModelParams) -> Propagator:
    return Propagator(params)


def free_step(state: QuantumState) -> QuantumState:
    return propagator(state.params).free_step(state)


def kick_step(state: QuantumState) -> QuantumState:
    return propagator(state.params).kick_step(state)


def floquet_step(state: QuantumState) -> QuantumState:
    return propagator(state.params).floquet_step(state)


def _edge_rows(N_R: int, fraction: float) -> slice:
    # rows with |l| >= limit are contiguous in FFT order
    limit = max(int(math.ceil(fraction * N_R)), 1)
    return slice(limit, N_R - limit + 1)


def _tail(c: np.ndarray, rows: slice) -> float:
    band = c[rows]
    return float(np.vdot(band, band).real)


def momentum_tail(state: QuantumState, fraction: float = GUARD_FRACTION) -> float:
    """Probability carried by ``|l| >= fraction * N_R``."""
    c = as_rep(state, Rep.MOM_LEVEL).coeffs
    return _tail(c, _edge_rows(state.params.N_R, fraction))


Observer = Callable[[QuantumState], dict]


def evolve(
    state: QuantumState,
    n: int,
    observer: Observer | None = None,
    every: int = 1,
    series: TimeSeries | None = None,
    guard_tol: float | None = GUARD_TOL,
    checkpoint: str | Path | None = None,
    checkpoint_every: int | None = None,
) -> TimeSeries:
    """Apply ``n`` Floquet steps to ``state`` in place and record observables.

    ``observer(state)`` returns a row dict; it is called after every kick whose
    count is a multiple of ``every``, and after the last kick.  The momentum
    tail is checked after each kick unless ``guard_tol`` is None.  If
    ``checkpoint`` is set the state is written there every
    ``checkpoint_every`` kicks, at the end, and on KeyboardInterrupt.

    Raises:
        AliasingError: momentum support exceeded the guard.
    """
    if n < 0:
        raise ValueError(f"number of kicks must be non-negative, got {n}")
    if every < 1:
        raise ValueError(f"observer interval must be positive, got {every}")
    observer = observer or quantum_observer()
    series = series if series is not None else TimeSeries()
    prop = propagator(state.params)

    c = as_rep(state, Rep.MOM_LEVEL).coeffs
    kick = state.kick_count
    rows = _edge_rows(state.params.N_R, GUARD_FRACTION)
    target = kick + n

    def snapshot() -> QuantumState:
        return QuantumState(c, Rep.MOM_LEVEL, state.params, kick)

    try:
        while kick < target:
            c = prop._step_array(c)
            kick += 1
            if guard_tol is not None:
                tail = _tail(c, rows)
                if tail > guard_tol:
                    raise AliasingError(kick, tail, rows.start)
            if kick % every == 0 or kick == target:
                series.append({"n": kick, **observer(snapshot())})
            if checkpoint is not None and checkpoint_every and kick % checkpoint_every == 0:
                save_checkpoint(snapshot(), checkpoint)
    except KeyboardInterrupt:
        if checkpoint is not None:
            log.warning("interrupted at kick %d; checkpoint written to %s", kick, checkpoint)
            save_checkpoint(snapshot(), checkpoint)
        raise
    finally:
        state.coeffs = c
        state.rep = Rep.MOM_LEVEL
        state.kick_count = kick
    if checkpoint is not None:
        save_checkpoint(state, checkpoint)
    return series


# --- single kicked rotor (w = 0) -------------------------------------------------


@lru_cache(maxsize=8)
def _single_rotor_tables(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    g = grids(params)
    l = g.l.astype(float)
    free = np.exp(-1j * params.hbar * l**2 * params.T / (2.0 * params.M))
    strength = params.K if params.literal_kick else params.K / params.hbar
    kick = np.exp(-1j * strength * np.cos(g.R))
    return free, kick


def single_rotor_step(amps: np.ndarray, params: ModelParams) -> np.ndarray:
    """One period of the quantum kicked rotor on momentum amplitudes (FFT order, length ``N_R``)."""
    free, kick = _single_rotor_tables(params)
    psi = sfft.ifft(np.asarray(amps, dtype=np.complex128) * free, norm="ortho")
    psi *= kick
    return sfft.fft(psi, norm="ortho", overwrite_x=True)


def single_rotor_initial(params: ModelParams) -> np.ndarray:
    amps = np.zeros(params.N_R, dtype=np.complex128)
    amps[0] = 1.0
    return amps


def evolve_single_rotor(
    params: ModelParams,
    n: int,
    every: int = 1,
    amps: np.ndarray | None = None,
    guard_tol: float | None = GUARD_TOL,
) -> tuple[np.ndarray, TimeSeries]:
    """Propagate the single rotor from ``l = 0`` (or ``amps``).

    Returns the final amplitudes and the recorded momentum moments.
    """
    from .observables import momentum_moments

    amps = single_rotor_initial(params) if amps is None else np.asarray(amps, dtype=np.complex128)
    g = grids(params)
    rows = _edge_rows(params.N_R, GUARD_FRACTION)
    series = TimeSeries()
    for kick in range(1, n + 1):
        amps = single_rotor_step(amps, params)
        prob = np.abs(amps) ** 2
        if guard_tol is not None and prob[rows].sum() > guard_tol:
            raise AliasingError(kick, float(prob[rows].sum()), rows.start)
        if kick % every == 0 or kick == n:
            series.append({"n": kick, **momentum_moments(prob, g.P, params)})
    return amps, series
