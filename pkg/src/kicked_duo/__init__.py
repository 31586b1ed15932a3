"""Quantum and classical dynamics of two coupled delta-kicked rotors."""

from .params import BoxSpectrum, ConfigError, ModelParams, box_spectrum, derive_params
from .hilbert import QuantumState, Rep, initial_state, load_checkpoint, save_checkpoint, to_mom_level, to_pos_pos
from .quantum import AliasingError, evolve, floquet_step, free_step, kick_step, single_rotor_step
from .classical import ClassicalEnsemble, Particle, evolve_ensemble, sample_ensemble, standard_map_step
from .observables import (
    GramMatrix,
    TimeSeries,
    classical_entropy,
    fit_diffusion,
    gram,
    linear_entropy,
    momentum_distribution,
    momentum_variance,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "BoxSpectrum",
    "ClassicalEnsemble",
    "ConfigError",
    "GramMatrix",
    "ModelParams",
    "Particle",
    "QuantumState",
    "Rep",
    "TimeSeries",
    "box_spectrum",
    "classical_entropy",
    "derive_params",
    "evolve",
    "evolve_ensemble",
    "fit_diffusion",
    "floquet_step",
    "free_step",
    "gram",
    "initial_state",
    "kick_step",
    "linear_entropy",
    "load_checkpoint",
    "momentum_distribution",
    "momentum_variance",
    "sample_ensemble",
    "save_checkpoint",
    "single_rotor_step",
    "standard_map_step",
    "to_mom_level",
    "to_pos_pos",
    "von_neumann_entropy",
]
