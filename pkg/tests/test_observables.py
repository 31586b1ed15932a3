import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kicked_duo import (
    Rep,
    TimeSeries,
    classical_entropy,
    derive_params,
    fit_diffusion,
    gram,
    initial_state,
    linear_entropy,
    momentum_distribution,
    momentum_variance,
    sample_ensemble,
    to_pos_pos,
    von_neumann_entropy,
)
from kicked_duo.classical import ClassicalEnsemble, evolve_ensemble
from kicked_duo.hilbert import QuantumState, grids, random_state
from kicked_duo.observables import GramMatrix, difference_series, excess_kurtosis, momentum_marginal
from kicked_duo.quantum import evolve


def _rho_from_positions(state):
    """Center-of-mass density matrix on the R grid by summing over the r samples."""
    pos = to_pos_pos(state)
    phi = pos.coeffs * math.sqrt(grids(state.params).weight)
    return phi @ phi.conj().T


@pytest.mark.parametrize("shape", [(16, 4), (32, 8), (64, 16)])
def test_gram_spectrum_matches_partial_trace(rng, shape):
    p = derive_params(N_R=shape[0], N_r=shape[1])
    state = random_state(p, rng, Rep.MOM_LEVEL)
    g = gram(state)
    rho = _rho_from_positions(state)
    lam_rho = np.sort(np.linalg.eigvalsh(rho))[-shape[1]:]
    np.testing.assert_allclose(np.sort(g.eigenvalues()), lam_rho, atol=1e-10)
    assert g.trace == pytest.approx(1.0, abs=1e-10)
    assert g.eigenvalues().min() > -1e-12
    assert g.purity() == pytest.approx(np.vdot(rho, rho).real, abs=1e-10)


def test_product_state_is_pure():
    p = derive_params(N_R=32, N_r=8)
    rng = np.random.default_rng(0)
    a = rng.normal(size=32) + 1j * rng.normal(size=32)
    b = rng.normal(size=8) + 1j * rng.normal(size=8)
    c = np.outer(a, b)
    c /= np.linalg.norm(c)
    g = gram(QuantumState(c, Rep.MOM_LEVEL, p))
    assert linear_entropy(g) < 1e-14
    assert von_neumann_entropy(g) < 1e-12
    assert linear_entropy(gram(initial_state(p))) == 0.0


def test_schmidt_rank_two():
    p = derive_params(N_R=16, N_r=4)
    c = np.zeros((16, 4), complex)
    q = 0.3
    c[2, 0] = math.sqrt(q)
    c[5, 3] = math.sqrt(1 - q)
    g = gram(QuantumState(c, Rep.MOM_LEVEL, p))
    assert linear_entropy(g) == pytest.approx(1 - q**2 - (1 - q) ** 2, abs=1e-14)
    assert von_neumann_entropy(g) == pytest.approx(-q * math.log(q) - (1 - q) * math.log(1 - q), abs=1e-13)


def test_maximally_mixed():
    N_r = 8
    p = derive_params(N_R=16, N_r=N_r)
    c = np.zeros((16, N_r), complex)
    for n in range(N_r):
        c[n, n] = 1 / math.sqrt(N_r)
    g = gram(QuantumState(c, Rep.MOM_LEVEL, p))
    assert linear_entropy(g) == pytest.approx(1 - 1 / N_r, abs=1e-14)
    assert von_neumann_entropy(g) == pytest.approx(math.log(N_r), abs=1e-13)


def test_entropy_cutoff():
    g = GramMatrix(np.diag([1.0, 1e-16, 0.0]))
    assert von_neumann_entropy(g) == 0.0
    with pytest.raises(ValueError):
        von_neumann_entropy(g, cutoff=-1.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N_r=st.sampled_from([2, 4, 8]))
def test_von_neumann_bounds_linear_entropy(seed, N_r):
    p = derive_params(N_R=16, N_r=N_r)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(16, N_r)) + 1j * rng.normal(size=(16, N_r))
    c[:, 1:] *= rng.uniform(0, 1, size=N_r - 1) ** 3
    c /= np.linalg.norm(c)
    g = gram(QuantumState(c, Rep.MOM_LEVEL, p))
    s_l, S = linear_entropy(g), von_neumann_entropy(g)
    assert 0.0 <= s_l <= 1 - 1 / N_r + 1e-12
    assert S >= s_l - 1e-12
    assert S <= math.log(N_r) + 1e-12


def _ensemble(R, P, params):
    n = len(R)
    return ClassicalEnsemble(np.asarray(R, float), np.asarray(P, float), np.zeros(n), np.zeros(n), params)


def test_classical_entropy_single_cell():
    p = derive_params()
    ens = _ensemble(np.full(100, 0.01), np.full(100, 0.1), p)
    assert classical_entropy(ens) == 0.0


@pytest.mark.parametrize("cells", [2, 7, 64])
def test_classical_entropy_uniform_cells(cells):
    p = derive_params()
    R = (np.arange(cells) + 0.5) * 2 * math.pi / 64
    ens = _ensemble(np.repeat(R, 10), np.zeros(10 * cells), p)
    assert classical_entropy(ens) == pytest.approx(math.log(cells), abs=1e-13)


def test_classical_entropy_momentum_cells():
    p = derive_params()
    P = np.array([0.1, 0.1, p.K + 0.1, p.K + 0.1, -0.1, -0.1])
    assert classical_entropy(_ensemble(np.full(6, 1.0), P, p)) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        classical_entropy(_ensemble([1.0], [0.0], p), P_bin_width=0.0)


def _linear_series(slope, n_max=300, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    series = TimeSeries()
    for n in range(1, n_max + 1):
        series.append({"n": n, "P2_mean": slope * n + 3.0 + noise * rng.normal()})
    return series


def test_fit_diffusion_exact_line():
    fit = fit_diffusion(_linear_series(4.0))
    assert fit.D == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(3.0, abs=1e-9)
    assert fit.n_points == 181
    assert fit.residual_std < 1e-9


def test_fit_diffusion_noisy_line():
    fit = fit_diffusion(_linear_series(4.0, noise=5.0), 20, 200)
    assert abs(fit.D - 2.0) < 4 * fit.stderr


@pytest.mark.parametrize("window", [(50, 50), (200, 100), (0, 100), (20, 400)])
def test_fit_diffusion_bad_windows(window):
    with pytest.raises(ValueError):
        fit_diffusion(_linear_series(1.0), *window)


def test_fit_diffusion_too_few_points():
    series = TimeSeries()
    for n in (10, 100, 300):
        series.append({"n": n, "P2_mean": float(n)})
    with pytest.raises(ValueError):
        fit_diffusion(series, 20, 200)


def test_quantum_distribution_normalized():
    p = derive_params(N_R=512, N_r=16, hbar=0.25)
    state = initial_state(p)
    evolve(state, 5)
    P, f = momentum_distribution(state)
    assert np.sum(f) * p.hbar == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(P) > 0)
    Pb, fb = momentum_distribution(state, bin_width=1.0)
    assert np.sum(fb) * 1.0 == pytest.approx(1.0, abs=1e-12)
    mean = np.dot(P, f) * p.hbar
    assert mean == pytest.approx(0.0, abs=1e-10)


def test_classical_distribution_normalized():
    p = derive_params(hbar=0.25)
    ens = sample_ensemble(p, 10_000, seed=2)
    evolve_ensemble(ens, 10)
    P, f = momentum_distribution(ens)
    assert np.sum(f) * p.K / 10 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        momentum_distribution(ens, bin_width=-1.0)


def test_first_kick_normalized_variance():
    # Delta^2 = <cos^2(r/2)> after one period; M = 1 at default mass
    p = derive_params(N_R=1024, N_r=32, hbar=0.25, w=0.5)
    ens = sample_ensemble(p, 100_000, seed=1)
    evolve_ensemble(ens, 1)
    c2 = np.mean(np.cos(0.5 * ens.r) ** 2)
    assert momentum_variance(ens) == pytest.approx(c2 / p.M, rel=0.02)
    state = initial_state(p)
    evolve(state, 1)
    assert momentum_variance(state) == pytest.approx(c2 / p.M, rel=0.02)


def test_kurtosis_of_gaussian_and_quantum_state():
    p = derive_params(hbar=0.25)
    rng = np.random.default_rng(0)
    ens = _ensemble(rng.uniform(0, 6, 200_000), rng.normal(0, 3, 200_000), p)
    assert abs(excess_kurtosis(ens)) < 0.05
    q = derive_params(N_R=256, N_r=8, hbar=0.25)
    state = initial_state(q)
    state.coeffs[:] = 0
    l = grids(q).l
    state.coeffs[:, 0] = np.exp(-(l / 10.0) ** 2 / 4)
    state.coeffs /= np.linalg.norm(state.coeffs)
    assert abs(excess_kurtosis(state)) < 1e-6


def test_marginal_sums_to_norm(rng):
    p = derive_params(N_R=64, N_r=8)
    state = random_state(p, rng, Rep.MOM_LEVEL)
    assert momentum_marginal(state).sum() == pytest.approx(1.0, abs=1e-13)


def test_time_series_csv_round_trip(tmp_path):
    series = TimeSeries()
    series.append({"n": 1, "P_mean": 0.1, "P2_mean": 1 / 3, "delta2": 0.5, "s_l": 0.25})
    series.append({"n": 2, "P_mean": -0.0, "P2_mean": 2.0, "delta2": math.nan, "s_l": 0.5, "S_vn": 1e-300})
    path = tmp_path / "ts.csv"
    series.to_csv(path)
    back = TimeSeries.from_csv(path)
    np.testing.assert_array_equal(back.n, [1, 2])
    assert back.rows[0]["P2_mean"] == 1 / 3
    assert back.rows[1]["S_vn"] == 1e-300
    assert math.isnan(back.column("delta2")[1])
    assert math.isnan(back.column("S_cl")[0])
    assert path.read_text().splitlines()[0] == "n,P_mean,P2_mean,delta2,s_l,S_vn,S_cl"


def test_time_series_validation():
    series = TimeSeries()
    series.append({"n": 3})
    with pytest.raises(ValueError):
        series.append({"n": 3})
    with pytest.raises(KeyError):
        series.append({"n": 4, "bogus": 1.0})


def test_difference_series():
    a, b = _linear_series(2.0, 10), _linear_series(1.0, 10)
    n, d = difference_series(a, b, "P2_mean")
    np.testing.assert_allclose(d, n, atol=1e-12)
    with pytest.raises(ValueError):
        difference_series(a, _linear_series(1.0, 9), "P2_mean")


def test_linear_entropy_clamped():
    assert linear_entropy(GramMatrix(np.diag([1.0 + 1e-15]))) == 0.0
