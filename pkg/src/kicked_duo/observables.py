"""Transport and decoherence observables for quantum states and classical ensembles.

Quantum center-of-mass statistics come from the ``MOM_LEVEL`` marginal
``sum_n |c[l, n]|^2`` at ``P_l = hbar l``.  The reduced density matrix of the
center of mass is never formed: its nonzero spectrum equals that of the
``N_r x N_r`` Gram matrix ``G = C^H C``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.stats

from .hilbert import QuantumState, Rep, as_rep, grids
from .params import ModelParams

COLUMNS = ("n", "P_mean", "P2_mean", "delta2", "s_l", "S_vn", "S_cl")

#: Eigenvalues at or below this are dropped from the von Neumann sum.
EIG_CUTOFF = 1e-14


@dataclass
class TimeSeries:
    """Per-kick records; each row is a dict keyed by :data:`COLUMNS`."""

    rows: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: dict) -> None:
        unknown = set(row) - set(COLUMNS)
        if unknown:
            raise KeyError(f"unknown time-series columns {sorted(unknown)}")
        if self.rows and row["n"] <= self.rows[-1]["n"]:
            raise ValueError(f"kick index must increase: {row['n']} after {self.rows[-1]['n']}")
        self.rows.append(dict(row))

    def extend(self, other: TimeSeries) -> None:
        for row in other.rows:
            self.append(row)

    def column(self, name: str) -> np.ndarray:
        """Values of one column; missing entries are NaN."""
        if name not in COLUMNS:
            raise KeyError(name)
        return np.array([row.get(name, math.nan) for row in self.rows], dtype=float)

    @property
    def n(self) -> np.ndarray:
        return np.array([row["n"] for row in self.rows], dtype=np.int64)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row.get(name)) for name in COLUMNS])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> TimeSeries:
        series = cls()
        with open(path, newline="") as fh:
            for record in csv.DictReader(fh):
                row = {}
                for name, value in record.items():
                    if name not in COLUMNS:
                        raise KeyError(f"{path}: unexpected column {name!r}")
                    if value == "":
                        continue
                    row[name] = int(value) if name == "n" else float(value)
                series.append(row)
        return series


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "" if math.isnan(value) else repr(value)


# --- momentum statistics --------------------------------------------------------


def _is_quantum(obj) -> bool:
    return isinstance(obj, QuantumState)


def momentum_marginal(state: QuantumState) -> np.ndarray:
    """Probability of each momentum index ``l`` (FFT order)."""
    c = as_rep(state, Rep.MOM_LEVEL).coeffs
    return np.einsum("ij,ij->i", c.real, c.real) + np.einsum("ij,ij->i", c.imag, c.imag)


def _delta2(variance: float, params: ModelParams) -> float:
    scale = params.M * params.K**2
    return 2.0 * variance / scale if scale > 0 else math.nan


def momentum_moments(prob: np.ndarray, P: np.ndarray, params: ModelParams) -> dict:
    """``<P>``, ``<P^2>`` and the normalized variance for a distribution on a momentum grid."""
    total = prob.sum()
    mean = float(np.dot(prob, P) / total)
    second = float(np.dot(prob, P * P) / total)
    return {"P_mean": mean, "P2_mean": second, "delta2": _delta2(max(second - mean**2, 0.0), params)}


def _ensemble_P(ensemble) -> np.ndarray:
    P = np.asarray(ensemble.P, dtype=float)
    if P.size == 0:
        raise ValueError("empty ensemble")
    return P


def ensemble_moments(ensemble) -> dict:
    P = _ensemble_P(ensemble)
    mean = float(np.mean(P))
    second = float(np.mean(P * P))
    return {
        "P_mean": mean,
        "P2_mean": second,
        "delta2": _delta2(max(second - mean**2, 0.0), ensemble.params),
    }


def momentum_variance(obj) -> float:
    """Normalized variance ``2 (<P^2> - <P>^2) / (M K^2)`` of a state or ensemble."""
    if _is_quantum(obj):
        g = grids(obj.params)
        return momentum_moments(momentum_marginal(obj), g.P, obj.params)["delta2"]
    return ensemble_moments(obj)["delta2"]


def momentum_distribution(obj, bin_width: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Density ``f(P)`` on bin centers, normalized so that ``sum(f) * bin_width == 1``.

    For a quantum state the default bin is ``hbar`` (the exact marginal);
    wider bins are centered on ``P = 0``.  For an ensemble the default bin is
    ``K / 10`` (or 1 when ``K = 0``).
    """
    if bin_width is not None and not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width!r}")
    if _is_quantum(obj):
        hbar = obj.params.hbar
        prob = np.fft.fftshift(momentum_marginal(obj))
        P = hbar * grids(obj.params).l_centered
        if bin_width is None:
            return P.astype(float), prob / hbar
        idx = np.floor(P / bin_width + 0.5).astype(np.int64)
        lo, hi = idx.min(), idx.max()
        f = np.bincount(idx - lo, weights=prob, minlength=hi - lo + 1) / bin_width
        return bin_width * np.arange(lo, hi + 1, dtype=float), f
    P = _ensemble_P(obj)
    if bin_width is None:
        K = obj.params.K
        bin_width = K / 10 if K > 0 else 1.0
    idx = np.floor(P / bin_width + 0.5).astype(np.int64)
    lo, hi = idx.min(), idx.max()
    f = np.bincount(idx - lo, minlength=hi - lo + 1) / (P.size * bin_width)
    return bin_width * np.arange(lo, hi + 1, dtype=float), f


def excess_kurtosis(obj) -> float:
    """Excess kurtosis of the center-of-mass momentum distribution."""
    if _is_quantum(obj):
        prob = momentum_marginal(obj)
        P = grids(obj.params).P.astype(float)
        prob = prob / prob.sum()
        mean = np.dot(prob, P)
        d = P - mean
        var = np.dot(prob, d**2)
        return float(np.dot(prob, d**4) / var**2 - 3.0)
    return float(scipy.stats.kurtosis(_ensemble_P(obj), fisher=True, bias=True))


# --- reduced density matrix -----------------------------------------------------


@dataclass(frozen=True)
class GramMatrix:
    """``G[n, n'] = sum_l conj(c[l, n]) c[l, n']``; shares its nonzero spectrum with rho_R."""

    G: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.G).real)

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.G)

    def purity(self) -> float:
        """``Tr G^2``, equal to ``Tr rho_R^2``."""
        G = self.G
        return float(np.vdot(G, G).real)


def gram(state: QuantumState) -> GramMatrix:
    c = as_rep(state, Rep.MOM_LEVEL).coeffs
    G = c.conj().T @ c
    G = 0.5 * (G + G.conj().T)
    return GramMatrix(G)


def linear_entropy(g: GramMatrix) -> float:
    """``1 - Tr rho_R^2``, clamped to ``[0, 1]``."""
    return min(max(1.0 - g.purity(), 0.0), 1.0)


def von_neumann_entropy(g: GramMatrix, cutoff: float = EIG_CUTOFF) -> float:
    """``-sum lambda ln lambda`` over eigenvalues above ``cutoff`` (natural log)."""
    if cutoff < 0:
        raise ValueError(f"cutoff must be non-negative, got {cutoff!r}")
    lam = g.eigenvalues()
    lam = lam[lam > cutoff]
    return float(max(-np.sum(lam * np.log(lam)), 0.0))


# --- classical entropy ----------------------------------------------------------

#: Default number of angle cells for the coarse-grained classical entropy.
R_BINS = 64


def classical_entropy(ensemble, R_bins: int = R_BINS, P_bin_width: float | None = None) -> float:
    """Shannon entropy of cell occupations on a fixed ``(R, P)`` grid.

    ``R_bins`` cells cover ``[0, 2 pi)``; momentum cells of width
    ``P_bin_width`` (default ``K``) are anchored at ``P = 0``.
    """
    if R_bins < 1:
        raise ValueError(f"R_bins must be positive, got {R_bins!r}")
    if P_bin_width is None:
        P_bin_width = ensemble.params.K
    if not P_bin_width > 0:
        raise ValueError(f"P_bin_width must be positive, got {P_bin_width!r}")
    P = _ensemble_P(ensemble)
    R = np.asarray(ensemble.R, dtype=float)
    ri = np.minimum((R * (R_bins / (2 * math.pi))).astype(np.int64), R_bins - 1)
    pi = np.floor(P / P_bin_width).astype(np.int64)
    keys = (pi - pi.min()) * R_bins + ri
    counts = np.unique(keys, return_counts=True)[1]
    q = counts / P.size
    return float(-np.sum(q * np.log(q)))


# --- diffusion -----------------------------------------------------------------


@dataclass(frozen=True)
class DiffusionFit:
    """``D = slope / 2`` of ``<P^2>`` against kick number."""

    D: float
    stderr: float
    residual_std: float
    intercept: float
    n_points: int


FIT_WINDOW = (20, 200)


def fit_diffusion(series: TimeSeries, n_lo: int = FIT_WINDOW[0], n_hi: int = FIT_WINDOW[1]) -> DiffusionFit:
    """Least-squares line through ``<P^2>`` over ``n_lo <= n <= n_hi``."""
    if n_hi <= n_lo:
        raise ValueError(f"degenerate fit window [{n_lo}, {n_hi}]")
    n = series.n
    if len(n) == 0 or n_lo < n[0] or n_hi > n[-1]:
        raise ValueError(f"fit window [{n_lo}, {n_hi}] not inside recorded kicks")
    mask = (n >= n_lo) & (n <= n_hi)
    if mask.sum() < 3:
        raise ValueError(f"fit window [{n_lo}, {n_hi}] holds fewer than 3 records")
    x = n[mask].astype(float)
    y = series.column("P2_mean")[mask]
    fit = scipy.stats.linregress(x, y)
    resid = y - (fit.intercept + fit.slope * x)
    dof = max(len(x) - 2, 1)
    return DiffusionFit(
        D=0.5 * fit.slope,
        stderr=0.5 * fit.stderr,
        residual_std=float(math.sqrt(np.dot(resid, resid) / dof)),
        intercept=float(fit.intercept),
        n_points=int(len(x)),
    )


# --- observers ------------------------------------------------------------------


def quantum_observer(entropy: bool = True, svn: bool = False, cutoff: float = EIG_CUTOFF) -> Callable[[QuantumState], dict]:
    """Row builder for :func:`kicked_duo.quantum.evolve`."""

    def observe(state: QuantumState) -> dict:
        g = grids(state.params)
        row = momentum_moments(momentum_marginal(state), g.P, state.params)
        if entropy or svn:
            G = gram(state)
            if entropy:
                row["s_l"] = linear_entropy(G)
            if svn:
                row["S_vn"] = von_neumann_entropy(G, cutoff)
        return row

    return observe


def classical_observer(entropy: bool = True, R_bins: int = R_BINS, P_bin_width: float | None = None):
    def observe(ensemble) -> dict:
        row = ensemble_moments(ensemble)
        if entropy:
            row["S_cl"] = classical_entropy(ensemble, R_bins, P_bin_width)
        return row

    return observe


def difference_series(a: TimeSeries, b: TimeSeries, column: str = "delta2") -> tuple[np.ndarray, np.ndarray]:
    """``a - b`` for one column on the common kick grid.

    Raises:
        ValueError: the two series were not recorded at the same kicks.
    """
    if len(a) != len(b) or not np.array_equal(a.n, b.n):
        raise ValueError("time series are not aligned on the same kicks")
    return a.n, a.column(column) - b.column(column)
