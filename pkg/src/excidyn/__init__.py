"""Generalized Bloch equations for a pulse-driven dimer with phonons and optical noise."""

from .model import (HBAR_EV_FS, BathParams, Constants, DimerParams, Eigensystem,
                    NoiseParams, Numerics, ParameterError, PulseParams, Scenario,
                    bose_occupation, eigensystem, free_propagator, level_splitting)
from .presets import PRESET_NAMES, preset
from .integrator import (StateVector, TrajectoryRecord, integrate, monitors,
                         reconstruct_density, step)

__version__ = "0.1.0"
