import math

import numpy as np
import pytest
import scipy.integrate
from scipy.linalg import eigh_tridiagonal

from kicked_duo import ConfigError, box_spectrum, derive_params
from kicked_duo.params import load_config, params_from_config, parse_config


def test_defaults_and_derived_quantities():
    p = derive_params()
    assert (p.m, p.k, p.T, p.hbar, p.w) == (0.5, 2.5, 1.0, 0.07, 0.5)
    assert (p.N_R, p.N_r, p.n_kicks) == (16384, 256, 500)
    assert p.M == 1.0
    assert p.mu == 0.25
    assert p.K == 5.0
    assert p.kick_strength == pytest.approx(5.0 / 0.07)


@pytest.mark.parametrize("m,k", [(0.5, 2.5), (1.0, 0.3), (3.7, 0.0)])
def test_com_transform(m, k):
    p = derive_params(m=m, k=k)
    assert p.M == pytest.approx(2 * m)
    assert p.mu == pytest.approx(m / 2)
    assert p.K == pytest.approx(2 * k)
    # reduced mass of two equal masses
    assert p.mu == pytest.approx(m * m / (m + m))


def test_rederivation_is_idempotent():
    p = derive_params(m=0.8, k=1.1, hbar=0.25, w=0.3, N_R=512, N_r=16)
    assert derive_params(**p.as_dict()) == p
    assert p.replace() == p


def test_literal_kick_strength():
    p = derive_params(hbar=0.25, literal_kick=True)
    assert p.kick_strength == p.K


@pytest.mark.parametrize(
    "changes",
    [
        {"m": 0.0},
        {"m": -1.0},
        {"T": 0.0},
        {"hbar": -0.1},
        {"hbar": math.nan},
        {"w": 0.0},
        {"w": 3.2},
        {"k": -0.5},
        {"N_R": 0},
        {"N_R": 1023},
        {"N_r": 0},
        {"n_kicks": -1},
    ],
)
def test_invalid_params_rejected(changes):
    with pytest.raises(ConfigError):
        derive_params(**changes)


def test_replace_revalidates():
    with pytest.raises(ConfigError):
        derive_params().replace(w=-1.0)


def test_zero_kick_allowed():
    assert derive_params(k=0.0).K == 0.0


def test_ground_level_value():
    E = box_spectrum(derive_params()).energies
    assert E[0] == pytest.approx(math.pi**2 * 0.07**2 / (8 * 0.25 * 0.25), rel=1e-14)
    assert E[0] == pytest.approx(0.096722, abs=1e-6)


def test_spectrum_matches_finite_differences():
    p = derive_params(w=0.5, hbar=0.07, N_r=8)
    N = 4000
    h = 2 * p.w / (N + 1)
    scale = p.hbar**2 / (2 * p.mu * h**2)
    fd = eigh_tridiagonal(np.full(N, 2 * scale), np.full(N - 1, -scale), select="i", select_range=(0, 7))[0]
    np.testing.assert_allclose(fd, box_spectrum(p).energies, rtol=1e-5)


def test_spectrum_scaling_laws():
    E = box_spectrum(derive_params(w=0.5, N_r=64)).energies
    n = np.arange(1, 65)
    np.testing.assert_allclose(E / E[0], n**2, rtol=1e-13)
    E_half = box_spectrum(derive_params(w=0.25, N_r=64)).energies
    np.testing.assert_allclose(E_half, 4 * E, rtol=1e-13)


@pytest.mark.parametrize("w", [0.1, 0.5, 1.0])
def test_eigenfunctions_orthonormal(w):
    spec = box_spectrum(derive_params(w=w, N_r=6))
    for a in range(1, 7):
        for b in range(a, 7):
            val = scipy.integrate.quad(
                lambda r: spec.eigenfunction(a, r) * spec.eigenfunction(b, r), -w, w, limit=200
            )[0]
            assert val == pytest.approx(float(a == b), abs=1e-10)


def test_eigenfunctions_vanish_at_walls():
    spec = box_spectrum(derive_params(w=0.7, N_r=4))
    for n in range(1, 5):
        np.testing.assert_allclose(spec.eigenfunction(n, np.array([-0.7, 0.7])), 0.0, atol=1e-14)


def test_parse_config_roundtrip(tmp_path):
    text = """
    # desk run
    hbar = 0.25
    w = 0.8    # wide well
    N_R = 4096
    N_r = 64
    n_kicks = 300
    mode = compare
    seed = 7
    svn = yes
    sweep_values = 0.1, 0.2,0.4
    """
    cfg = parse_config(text)
    assert cfg["hbar"] == 0.25 and cfg["N_R"] == 4096 and cfg["mode"] == "compare"
    assert cfg["svn"] is True
    assert cfg["sweep_values"] == [0.1, 0.2, 0.4]
    path = tmp_path / "run.cfg"
    path.write_text(text)
    assert load_config(path) == cfg
    p = params_from_config(cfg, n_kicks=10)
    assert (p.hbar, p.w, p.N_R, p.N_r, p.n_kicks) == (0.25, 0.8, 4096, 64, 10)
    assert p.m == 0.5


def test_whitespace_separated_values():
    assert parse_config("hbar 0.3\n")["hbar"] == 0.3


@pytest.mark.parametrize(
    "text",
    ["hbarr = 0.1", "N_R = 12.5", "svn = maybe", "just_a_word", "hbar = abc"],
)
def test_bad_config_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_validation_reaches_params():
    with pytest.raises(ConfigError):
        params_from_config(parse_config("w = 4.0"))
