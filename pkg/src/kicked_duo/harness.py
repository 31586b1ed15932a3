"""Reproducible experiment runs: single runs, comparisons, sweeps and figure presets.

Every run writes plain CSV (time series, momentum distribution) and a
``metadata.json`` with the full parameter set, code version, kernel backend
and wall time into its own directory.
"""

from __future__ import annotations

import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, classical, hilbert, kernels, quantum
from .hilbert import CheckpointError, QuantumState, initial_state, load_checkpoint
from .observables import (
    FIT_WINDOW,
    TimeSeries,
    classical_observer,
    difference_series,
    excess_kurtosis,
    fit_diffusion,
    momentum_distribution,
    quantum_observer,
)
from .params import PARAM_KEYS, ConfigError, ModelParams, derive_params, params_from_config

log = logging.getLogger(__name__)

MODES = ("quantum", "classical", "single-rotor-quantum", "single-rotor-classical", "compare", "sweep")
MEMBER_MODES = MODES[:-1]
DEFAULT_PARTICLES = 100_000
WORKERS_ENV = "KICKED_DUO_WORKERS"


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    params: ModelParams
    name: str = "run"
    seed: int = 0
    n_particles: int = DEFAULT_PARTICLES
    record_every: int = 1
    entropy: bool = True
    svn: bool = False
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    sweep_mode: str = "quantum"
    fit_window: tuple[int, int] = FIT_WINDOW
    checkpoint_every: int | None = None
    output_dir: Path = Path("out")
    scale: str | None = None
    notes: str = ""
    single_rotor: bool = False  # compare mode: use the w = 0 rotor on both sides

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be positive, got {self.record_every}")
        if self.n_particles < 1:
            raise ConfigError(f"n_particles must be positive, got {self.n_particles}")
        if self.mode == "sweep":
            if self.sweep_param not in PARAM_KEYS:
                raise ConfigError(f"sweep_param must be one of {PARAM_KEYS}, got {self.sweep_param!r}")
            if not self.sweep_values:
                raise ConfigError("sweep needs sweep_values")
            if self.sweep_param != "k" and any(not v > 0 for v in self.sweep_values):
                raise ConfigError(f"sweep values for {self.sweep_param} must be positive")
            if self.sweep_mode not in MEMBER_MODES or self.sweep_mode == "compare":
                raise ConfigError(f"sweep_mode must be a single-run mode, got {self.sweep_mode!r}")
        lo, hi = self.fit_window
        if hi <= lo:
            raise ConfigError(f"degenerate fit window {self.fit_window}")

    def members(self) -> list[ExperimentSpec]:
        """Single-run specs of a sweep, one per value."""
        out = []
        for value in self.sweep_values:
            params = self.params.replace(**{self.sweep_param: value})
            out.append(
                replace(
                    self,
                    mode=self.sweep_mode,
                    params=params,
                    name=f"{self.sweep_param}={value:g}",
                    sweep_param=None,
                    sweep_values=(),
                    output_dir=Path(self.output_dir) / self.name,
                )
            )
        return out

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / self.name


def spec_from_config(config: dict, **overrides) -> ExperimentSpec:
    params = params_from_config(config)
    kwargs = {
        "mode": config.get("mode", "quantum"),
        "params": params,
        "name": config.get("name", "run"),
        "seed": config.get("seed", 0),
        "n_particles": config.get("n_particles", DEFAULT_PARTICLES),
        "record_every": config.get("record_every", 1),
        "svn": config.get("svn", False),
        "sweep_param": config.get("sweep_param"),
        "sweep_values": tuple(config.get("sweep_values", ())),
        "fit_window": (config.get("fit_lo", FIT_WINDOW[0]), config.get("fit_hi", FIT_WINDOW[1])),
        "checkpoint_every": config.get("checkpoint_every"),
        "output_dir": Path(config.get("output_dir", "out")),
    }
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)


# --- single runs --------------------------------------------------------------------


def _metadata(spec: ExperimentSpec, wall_time: float, extra: dict | None = None) -> dict:
    meta = {
        "name": spec.name,
        "mode": spec.mode,
        "params": spec.params.as_dict(),
        "derived": {"M": spec.params.M, "mu": spec.params.mu, "K": spec.params.K},
        "seed": spec.seed,
        "record_every": spec.record_every,
        "fit_window": list(spec.fit_window),
        "scale": spec.scale,
        "notes": spec.notes,
        "code_version": __version__,
        "kernel_backend": kernels.BACKEND_NAME,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(wall_time, 3),
    }
    if spec.mode in ("classical", "single-rotor-classical", "compare"):
        meta.update(
            n_particles=spec.n_particles,
            rng=classical.RNG_ALGORITHM,
            recording=classical.RECORDING,
        )
    if extra:
        meta.update(extra)
    return meta


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


def _write_distribution(path: Path, P: np.ndarray, f: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("P,f\n")
        for a, b in zip(P, f):
            fh.write(f"{float(a)!r},{float(b)!r}\n")


def _run_quantum(spec: ExperimentSpec, out: Path, resume: QuantumState | None) -> dict:
    params = spec.params
    ts_path = out / "timeseries.csv"
    if resume is not None:
        _check_resume(resume, params)
        state = resume
        series = TimeSeries()
        if ts_path.exists():
            for row in TimeSeries.from_csv(ts_path).rows:
                if row["n"] <= state.kick_count:
                    series.append(row)
    else:
        state = initial_state(params)
        series = TimeSeries()
    start_kick = state.kick_count
    remaining = params.n_kicks - start_kick
    if remaining < 0:
        raise CheckpointError(f"checkpoint is at kick {state.kick_count}, beyond n_kicks={params.n_kicks}")
    observer = quantum_observer(entropy=spec.entropy, svn=spec.svn)
    quantum.evolve(
        state,
        remaining,
        observer=observer,
        every=spec.record_every,
        series=series,
        checkpoint=out / "checkpoint.kduo",
        checkpoint_every=spec.checkpoint_every,
    )
    series.to_csv(ts_path)
    _write_distribution(out / "distribution.csv", *momentum_distribution(state))
    extra = {"final_kick": state.kick_count, "excess_kurtosis": excess_kurtosis(state)}
    if resume is not None:
        extra["resumed_from_kick"] = start_kick
    return extra


def _check_resume(state: QuantumState, params: ModelParams) -> None:
    saved = state.params.replace(n_kicks=params.n_kicks)
    if saved != params:
        diffs = {
            k: (getattr(saved, k), getattr(params, k))
            for k in saved.as_dict()
            if getattr(saved, k) != getattr(params, k)
        }
        raise CheckpointError(f"checkpoint does not match the run parameters: {diffs}")


def _run_classical(spec: ExperimentSpec, out: Path, single: bool) -> dict:
    ensemble = classical.sample_ensemble(spec.params, spec.n_particles, spec.seed)
    observer = classical_observer(entropy=spec.entropy)
    evolve = classical.evolve_standard_map if single else classical.evolve_ensemble
    series = evolve(ensemble, spec.params.n_kicks, observer=observer, every=spec.record_every)
    series.to_csv(out / "timeseries.csv")
    _write_distribution(out / "distribution.csv", *momentum_distribution(ensemble))
    if not single:
        classical.save_snapshot(ensemble, out / "snapshot.csv")
    return {"final_kick": ensemble.kick_count, "excess_kurtosis": excess_kurtosis(ensemble)}


def _run_single_rotor_quantum(spec: ExperimentSpec, out: Path) -> dict:
    params = spec.params
    amps, series = quantum.evolve_single_rotor(params, params.n_kicks, every=spec.record_every)
    series.to_csv(out / "timeseries.csv")
    prob = np.fft.fftshift(np.abs(amps) ** 2)
    P = params.hbar * hilbert.grids(params).l_centered
    _write_distribution(out / "distribution.csv", P.astype(float), prob / params.hbar)
    return {"final_kick": params.n_kicks}


def _window_stats(n: np.ndarray, diff: np.ndarray, window: tuple[int, int]) -> dict:
    mask = (n >= window[0]) & (n <= window[1])
    values = diff[mask] if mask.any() else diff
    return {
        "max": float(np.max(values)),
        "mean": float(np.mean(values)),
        "window": list(window),
        "final": float(diff[-1]),
    }


def compare(quantum_csv: str | Path, classical_csv: str | Path, out_csv: str | Path | None = None,
            window: tuple[int, int] | None = None) -> dict:
    """Difference ``Delta_cl - Delta_qm`` of two aligned time series.

    Returns summary statistics (max, mean over ``window``, final value) and,
    if ``out_csv`` is given, writes ``n,delta2_cl,delta2_qm,cl_minus_qm``.

    Raises:
        ValueError: the series were recorded at different kicks.
    """
    q = TimeSeries.from_csv(quantum_csv)
    c = TimeSeries.from_csv(classical_csv)
    n, diff = difference_series(c, q)
    if out_csv is not None:
        dq, dc = q.column("delta2"), c.column("delta2")
        with open(out_csv, "w") as fh:
            fh.write("n,delta2_cl,delta2_qm,cl_minus_qm\n")
            for row in zip(n, dc, dq, diff):
                fh.write(f"{int(row[0])},{float(row[1])!r},{float(row[2])!r},{float(row[3])!r}\n")
    window = window or (int(n[0]), int(n[-1]))
    return _window_stats(n, diff, window)


def _run_compare(spec: ExperimentSpec, out: Path, single: bool) -> dict:
    qdir, cdir = out / "quantum", out / "classical"
    qdir.mkdir(exist_ok=True)
    cdir.mkdir(exist_ok=True)
    if single:
        _run_single_rotor_quantum(spec, qdir)
    else:
        _run_quantum(spec, qdir, None)
    _run_classical(spec, cdir, single)
    summary = compare(qdir / "timeseries.csv", cdir / "timeseries.csv", out / "compare.csv", spec.fit_window)
    extra = {"compare": summary}
    if not single:
        # classical single rotor from the same R samples, for Delta_single - Delta_two
        sdir = out / "classical_single"
        sdir.mkdir(exist_ok=True)
        _run_classical(spec, sdir, True)
        two, one = TimeSeries.from_csv(cdir / "timeseries.csv"), TimeSeries.from_csv(sdir / "timeseries.csv")
        n, diff = difference_series(one, two)
        with open(out / "inset.csv", "w") as fh:
            fh.write("n,delta2_single,delta2_two,single_minus_two\n")
            for row in zip(n, one.column("delta2"), two.column("delta2"), diff):
                fh.write(f"{int(row[0])},{float(row[1])!r},{float(row[2])!r},{float(row[3])!r}\n")
        extra["inset"] = _window_stats(n, diff, spec.fit_window)
    return extra


def _execute(spec: ExperimentSpec, resume_path: str | None = None) -> dict:
    out = spec.run_dir
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    if spec.mode == "quantum":
        resume = load_checkpoint(resume_path) if resume_path else None
        extra = _run_quantum(spec, out, resume)
    elif spec.mode == "classical":
        extra = _run_classical(spec, out, single=False)
    elif spec.mode == "single-rotor-classical":
        extra = _run_classical(spec, out, single=True)
    elif spec.mode == "single-rotor-quantum":
        extra = _run_single_rotor_quantum(spec, out)
    elif spec.mode == "compare":
        extra = _run_compare(spec, out, single=spec.single_rotor)
    else:
        raise ConfigError(f"mode {spec.mode!r} is not a single run")
    meta = _metadata(spec, time.perf_counter() - start, extra)
    _write_json(out / "metadata.json", meta)
    return meta


def _execute_in_worker(spec: ExperimentSpec) -> dict:
    hilbert.FFT_WORKERS = 1
    return _execute(spec)


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else ``KICKED_DUO_WORKERS``, else 1."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    workers = 1 if workers is None else workers
    if workers < 1:
        raise ConfigError(f"worker count must be positive, got {workers}")
    return workers


def run_many(specs: list[ExperimentSpec], workers: int = 1) -> list[dict]:
    """Run independent single-run specs, up to ``workers`` at a time, in order."""
    if workers <= 1 or len(specs) <= 1:
        return [_execute(s) for s in specs]
    with ProcessPoolExecutor(max_workers=min(workers, len(specs))) as pool:
        return list(pool.map(_execute_in_worker, specs))


def _sweep(spec: ExperimentSpec, workers: int) -> dict:
    members = spec.members()
    metas = run_many(members, workers)
    out = spec.run_dir
    rows = []
    for member, meta in zip(members, metas):
        p = member.params
        row = {
            spec.sweep_param: getattr(p, spec.sweep_param),
            "wK_over_hbar": p.w * p.K / p.hbar,
        }
        series = TimeSeries.from_csv(member.run_dir / "timeseries.csv")
        lo, hi = spec.fit_window
        if len(series) and series.n[0] <= lo and series.n[-1] >= hi:
            fit = fit_diffusion(series, lo, hi)
            row.update(D=fit.D, D_stderr=fit.stderr)
        else:
            row.update(D=math.nan, D_stderr=math.nan)
        row["delta2_final"] = float(series.column("delta2")[-1]) if len(series) else math.nan
        row["s_l_final"] = float(series.column("s_l")[-1]) if len(series) else math.nan
        rows.append(row)
    columns = list(rows[0])
    with open(out / "sweep.csv", "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join("" if isinstance(v, float) and math.isnan(v) else repr(float(v)) for v in row.values()) + "\n")
    return {"members": [m.name for m in members], "sweep_param": spec.sweep_param}


def run(spec: ExperimentSpec, resume: str | None = None, workers: int | None = None) -> dict:
    """Execute one spec (a sweep runs its members) and return its metadata.

    Raises:
        ConfigError: invalid spec or worker count.
        CheckpointError: the resume checkpoint does not match ``spec``.
        quantum.AliasingError: momentum support outgrew the grid.
    """
    workers = resolve_workers(workers)
    if spec.mode == "sweep":
        if resume:
            raise ConfigError("--resume applies to a single quantum run, not a sweep")
        out = spec.run_dir
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        extra = _sweep(spec, workers)
        meta = _metadata(spec, time.perf_counter() - start, extra)
        _write_json(out / "metadata.json", meta)
        return meta
    if resume and spec.mode != "quantum":
        raise ConfigError("--resume applies to quantum runs only")
    return _execute(spec, resume)


# --- figure presets ---------------------------------------------------------------

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")

_PAPER_GRID = {"N_R": 16384, "N_r": 256}


def _p(hbar, w, N_R, N_r, n_kicks) -> ModelParams:
    return derive_params(m=0.5, k=2.5, T=1.0, hbar=hbar, w=w, N_R=N_R, N_r=N_r, n_kicks=n_kicks)


def fig_presets(name: str, scale: str = "desk", output_dir: str | Path = "out", seed: int = 0) -> list[ExperimentSpec]:
    """Parameter sets behind each figure at ``paper`` or ``desk`` scale.

    Desk grids and hbar are chosen so that every run stays inside the
    momentum guard and the internal levels are converged; the choice is
    recorded in each spec's ``notes``.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    if scale not in ("paper", "desk"):
        raise ConfigError(f"scale must be 'paper' or 'desk', got {scale!r}")
    paper = scale == "paper"
    root = Path(output_dir) / f"{name}_{scale}"
    common = dict(output_dir=root, seed=seed, scale=scale)
    specs: list[ExperimentSpec] = []

    if name == "fig1":
        hbar, grid, n = (0.07, _PAPER_GRID, 500) if paper else (0.25, {"N_R": 4096, "N_r": 64}, 300)
        note = "" if paper else "desk: hbar=0.25, 4096x64, n=300"
        # w = 0 is the single rotor; its params carry a placeholder w
        specs.append(ExperimentSpec("compare", _p(hbar, 0.5, grid["N_R"], grid["N_r"], n),
                                    name="w=0", entropy=False, single_rotor=True, notes=note, **common))
        for w in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7):
            specs.append(ExperimentSpec("compare", _p(hbar, w, grid["N_R"], grid["N_r"], n),
                                        name=f"w={w:g}", entropy=False, notes=note, **common))
        specs.append(ExperimentSpec("classical", _p(hbar, 0.8, grid["N_R"], grid["N_r"], n),
                                    name="w=0.8_classical", entropy=False, notes="inset", **common))
    elif name == "fig2":
        runs = [(0.25, 0.2), (0.25, 1.0), (0.1, 0.2)]
        for hbar, w in runs:
            if paper:
                grid = _PAPER_GRID
            elif hbar == 0.1:
                grid = {"N_R": 8192, "N_r": 64}
            else:
                grid = {"N_R": 4096, "N_r": 128 if w >= 1 else 64}
            specs.append(ExperimentSpec("quantum", _p(hbar, w, grid["N_R"], grid["N_r"], 500),
                                        name=f"hbar={hbar:g}_w={w:g}", entropy=False, record_every=10,
                                        notes="" if paper else f"desk: {grid['N_R']}x{grid['N_r']}", **common))
    elif name == "fig3":
        grid, n = (_PAPER_GRID, 500) if paper else ({"N_R": 4096, "N_r": 128}, 100)
        for w in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7):
            specs.append(ExperimentSpec("quantum", _p(0.07, w, grid["N_R"], grid["N_r"], n),
                                        name=f"w={w:g}", notes="" if paper else "desk: 4096x128, n=100", **common))
    elif name == "fig4":
        grid, n = (_PAPER_GRID, 500) if paper else ({"N_R": 4096, "N_r": 64}, 200)
        values = (0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0)
        specs.append(ExperimentSpec("sweep", _p(0.25, 0.5, grid["N_R"], grid["N_r"], n), name="w_sweep",
                                    sweep_param="w", sweep_values=values, entropy=False,
                                    notes="" if paper else "desk: 4096x64, n=200", **common))
    else:  # fig5
        grid = {"N_R": 4096, "N_r": 256} if paper else {"N_R": 4096, "N_r": 128}
        for w in (0.2, 0.4, 0.6, 0.8, 1.0):
            specs.append(ExperimentSpec("quantum", _p(0.07, w, grid["N_R"], grid["N_r"], 100),
                                        name=f"w={w:g}", svn=True,
                                        notes="" if paper else "desk: 4096x128", **common))
        specs.append(ExperimentSpec("classical", _p(0.07, 0.8, grid["N_R"], grid["N_r"], 500),
                                    name="classical_w=0.8", **common))
    return specs


_PLOT_STUB = '''"""Plot stub for {name}; requires matplotlib (not a dependency of the package)."""
import csv, glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "**", "{target}"), recursive=True)):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    x = [float(r["{x}"]) for r in rows if r["{y}"]]
    y = [float(r["{y}"]) for r in rows if r["{y}"]]
    plt.plot(x, y, label=os.path.relpath(os.path.dirname(path), here))
plt.xlabel("{x}")
plt.ylabel("{y}")
plt.legend()
plt.savefig(os.path.join(here, "{name}.png"), dpi=150)
'''

_PLOT_TARGETS = {
    "fig1": ("compare.csv", "n", "cl_minus_qm"),
    "fig2": ("distribution.csv", "P", "f"),
    "fig3": ("timeseries.csv", "n", "s_l"),
    "fig4": ("sweep.csv", "wK_over_hbar", "D"),
    "fig5": ("timeseries.csv", "n", "S_vn"),
}


def run_preset(name: str, scale: str = "desk", output_dir: str | Path = "out", workers: int | None = None,
               overrides: dict | None = None, seed: int = 0) -> list[dict]:
    """Run every spec of a preset and drop a plot-script stub next to the data."""
    specs = fig_presets(name, scale, output_dir, seed)
    if overrides:
        specs = [replace(s, params=s.params.replace(**overrides)) for s in specs]
    workers = resolve_workers(workers)
    singles = [s for s in specs if s.mode != "sweep"]
    metas = run_many(singles, workers)
    for s in specs:
        if s.mode == "sweep":
            metas.append(run(s, workers=workers))
    root = Path(output_dir) / f"{name}_{scale}"
    target, x, y = _PLOT_TARGETS[name]
    (root / f"plot_{name}.py").write_text(_PLOT_STUB.format(name=name, target=target, x=x, y=y))
    return metas
