"""Product Hilbert space (center of mass x internal) and its two representations.

``POS_POS`` holds wave-function samples ``psi(R_j, r_j')`` on the uniform
angle grid ``R_j = 2 pi j / N_R`` and the interior well points
``r_j' = -w + j' 2w / (N_r + 1)``.  ``MOM_LEVEL`` holds expansion
coefficients ``c[l, n]`` over plane waves ``exp(i l R) / sqrt(2 pi)`` and box
levels ``phi_n``.  Inside the package the momentum axis is stored in FFT order
(``l = 0, 1, ..., N_R/2 - 1, -N_R/2, ..., -1``); :meth:`Grids.l_centered`
and the checkpoint format use ascending order.

The transform is ``c = sqrt(dV) * F S psi`` with orthonormal DFT ``F`` on the
R axis, orthonormal type-I DST ``S`` on the r axis and quadrature weight
``dV = (2 pi / N_R) (2 w / (N_r + 1))``; it is unitary between the weighted
position norm and the plain coefficient norm.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .params import ModelParams, derive_params

#: ``workers`` argument for scipy.fft; transforms are batched along one axis so
#: the result does not depend on it.
FFT_WORKERS = -1


class Rep(enum.IntEnum):
    POS_POS = 0
    MOM_LEVEL = 1


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True)
class Grids:
    R: np.ndarray
    l: np.ndarray  # FFT order
    P: np.ndarray  # hbar * l, FFT order
    r: np.ndarray
    n: np.ndarray
    dR: float
    dr: float

    @property
    def weight(self) -> float:
        return self.dR * self.dr

    @property
    def l_centered(self) -> np.ndarray:
        return np.fft.fftshift(self.l)


@lru_cache(maxsize=32)
def grids(params: ModelParams) -> Grids:
    N_R, N_r, w = params.N_R, params.N_r, params.w
    dR = 2 * math.pi / N_R
    dr = 2 * w / (N_r + 1)
    l = np.fft.fftfreq(N_R, d=1.0 / N_R).astype(np.int64)
    return Grids(
        R=dR * np.arange(N_R),
        l=l,
        P=params.hbar * l,
        r=-w + dr * np.arange(1, N_r + 1),
        n=np.arange(1, N_r + 1),
        dR=dR,
        dr=dr,
    )


@dataclass
class QuantumState:
    """Wave function on the product grid, tagged with its representation."""

    coeffs: np.ndarray
    rep: Rep
    params: ModelParams
    kick_count: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        expected = (self.params.N_R, self.params.N_r)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient grid has shape {self.coeffs.shape}, expected {expected}")
        self.rep = Rep(self.rep)

    def copy(self) -> QuantumState:
        return QuantumState(self.coeffs.copy(), self.rep, self.params, self.kick_count)

    def norm(self) -> float:
        """Squared norm, quadrature-weighted in ``POS_POS``."""
        total = float(np.vdot(self.coeffs, self.coeffs).real)
        if self.rep is Rep.POS_POS:
            total *= grids(self.params).weight
        return total


def _forward(psi: np.ndarray, weight: float) -> np.ndarray:
    out = sfft.dst(psi, type=1, axis=1, norm="ortho", workers=FFT_WORKERS)
    out = sfft.fft(out, axis=0, norm="ortho", overwrite_x=True, workers=FFT_WORKERS)
    out *= math.sqrt(weight)
    return out


def _backward(c: np.ndarray, weight: float) -> np.ndarray:
    out = sfft.ifft(c, axis=0, norm="ortho", workers=FFT_WORKERS)
    out = sfft.dst(out, type=1, axis=1, norm="ortho", overwrite_x=True, workers=FFT_WORKERS)
    out *= 1.0 / math.sqrt(weight)
    return out


def to_mom_level(state: QuantumState) -> QuantumState:
    if state.rep is not Rep.POS_POS:
        raise RepresentationError(f"to_mom_level expects POS_POS, got {state.rep.name}")
    coeffs = _forward(state.coeffs, grids(state.params).weight)
    return QuantumState(coeffs, Rep.MOM_LEVEL, state.params, state.kick_count)


def to_pos_pos(state: QuantumState) -> QuantumState:
    if state.rep is not Rep.MOM_LEVEL:
        raise RepresentationError(f"to_pos_pos expects MOM_LEVEL, got {state.rep.name}")
    coeffs = _backward(state.coeffs, grids(state.params).weight)
    return QuantumState(coeffs, Rep.POS_POS, state.params, state.kick_count)


def as_rep(state: QuantumState, rep: Rep) -> QuantumState:
    """Return ``state`` itself if already in ``rep``, else the transformed state."""
    if state.rep is rep:
        return state
    return to_mom_level(state) if rep is Rep.MOM_LEVEL else to_pos_pos(state)


def initial_state(params: ModelParams) -> QuantumState:
    """Uniform in R times the box ground state, in ``MOM_LEVEL``."""
    coeffs = np.zeros((params.N_R, params.N_r), dtype=np.complex128)
    coeffs[0, 0] = 1.0
    return QuantumState(coeffs, Rep.MOM_LEVEL, params, 0)


def random_state(params: ModelParams, rng: np.random.Generator, rep: Rep = Rep.POS_POS) -> QuantumState:
    """Normalized state with i.i.d. complex Gaussian entries in ``rep``."""
    shape = (params.N_R, params.N_r)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    state = QuantumState(coeffs, rep, params)
    state.coeffs /= math.sqrt(state.norm())
    return state


# --- checkpoints ----------------------------------------------------------------

MAGIC = b"KDUO"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQBQ")
_PARAM_FIELDS = ("m", "k", "T", "hbar", "w", "N_R", "N_r", "n_kicks", "literal_kick")
_PARAMS = struct.Struct("<" + "d" * len(_PARAM_FIELDS))


class CheckpointError(ValueError):
    pass


def save_checkpoint(state: QuantumState, path: str | Path) -> None:
    """Write the binary checkpoint (little-endian).

    Layout: magic ``KDUO``, version u32, N_R u64, N_r u64, rep u8,
    kick_count u64, the parameters ``m, k, T, hbar, w, N_R, N_r, n_kicks,
    literal_kick`` as f64, then ``N_R * N_r`` complex f64 values (re, im
    interleaved) row-major with R (or l, ascending from ``-N_R/2``) as the
    slow axis.
    """
    p = state.params
    coeffs = state.coeffs
    if state.rep is Rep.MOM_LEVEL:
        coeffs = np.fft.fftshift(coeffs, axes=0)
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, p.N_R, p.N_r, int(state.rep), state.kick_count)
    values = _PARAMS.pack(*(float(getattr(p, name)) for name in _PARAM_FIELDS))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values)
        fh.write(np.ascontiguousarray(coeffs, dtype="<c16").tobytes())


def load_checkpoint(path: str | Path) -> QuantumState:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + _PARAMS.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, N_R, N_r, rep, kick_count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    values = dict(zip(_PARAM_FIELDS, _PARAMS.unpack_from(data, _HEADER.size)))
    params = derive_params(**{**values, "literal_kick": bool(values["literal_kick"])})
    if (params.N_R, params.N_r) != (N_R, N_r):
        raise CheckpointError(f"{path}: grid size in header disagrees with stored parameters")
    offset = _HEADER.size + _PARAMS.size
    count = N_R * N_r
    if len(data) != offset + 16 * count:
        raise CheckpointError(f"{path}: expected {count} amplitudes, file size is {len(data)} bytes")
    coeffs = np.frombuffer(data, dtype="<c16", count=count, offset=offset).reshape(N_R, N_r)
    coeffs = coeffs.astype(np.complex128)
    rep = Rep(rep)
    if rep is Rep.MOM_LEVEL:
        coeffs = np.fft.ifftshift(coeffs, axes=0)
    return QuantumState(np.ascontiguousarray(coeffs), rep, params, int(kick_count))
