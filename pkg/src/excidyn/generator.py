"""Block generator of the nine-component dimer equations.

State ordering: R1 = (rho11, rho22, rho_r, rho_i, rho00) and
R2 = (rho1r, rho1i, rho2r, rho2i).  dR/dt = (J - G(t) - F(t)) R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import (CoherentDriveCoeffs, NoiseCoeffs, coherent_drive,
                    noise_coefficients, response_integrals, tilde_coefficients)
from .model import Scenario
from .phonon import PhononCoefficients, phonon_coefficients

POPULATION_ROWS = (0, 1, 4)


def free_blocks(eps: float, J: float, hbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Constant blocks J1 (5x5) and J2 (4x4) of the free exciton motion."""
    e, j = eps / hbar, J / hbar
    J1 = np.array([
        [0, 0, 0, -2 * j, 0],
        [0, 0, 0, 2 * j, 0],
        [0, 0, 0, 2 * e, 0],
        [j, -j, -2 * e, 0, 0],
        [0, 0, 0, 0, 0],
    ], dtype=float)
    J2 = np.array([
        [0, -e, 0, -j],
        [e, 0, j, 0],
        [0, -j, 0, e],
        [j, 0, -e, 0],
    ], dtype=float)
    return J1, J2


def _stack(rows):
    """Build (..., n, m) array from nested lists of broadcastable arrays."""
    rows = [[np.asarray(x, dtype=float) for x in r] for r in rows]
    shape = np.broadcast_shapes(*(x.shape for r in rows for x in r))
    return np.stack([np.stack([np.broadcast_to(x, shape) for x in r], axis=-1)
                     for r in rows], axis=-2)


def phonon_blocks(p: PhononCoefficients):
    z = np.zeros_like(np.asarray(p.A, dtype=float))
    G1 = _stack([
        [z, z, z, z, z],
        [z, z, z, z, z],
        [p.A, p.C, p.E, -p.F, z],
        [p.B, -p.D, p.F, p.E, z],
        [z, z, z, z, z],
    ])
    G2 = _stack([
        [p.A1, -p.B1, p.C1, -p.D1],
        [p.B1, p.A1, p.D1, p.C1],
        [p.C2, -p.D2, p.A2, -p.B2],
        [p.D2, p.C2, p.B2, p.A2],
    ])
    return G1, G2


def drive_blocks(k: CoherentDriveCoeffs):
    K1, K2, L1, L2 = k.K1, k.K2, k.L1, k.L2
    z = np.zeros_like(np.asarray(K1, dtype=float))
    F2 = _stack([
        [2 * K1, -2 * K2, z, z],
        [z, z, 2 * L1, -2 * L2],
        [L1, -L2, K1, -K2],
        [-L2, -L1, K2, K1],
        [-2 * K1, 2 * K2, -2 * L1, 2 * L2],
    ])
    F3 = _stack([
        [-K1, z, -L1, L2, K1],
        [K2, z, L2, L1, -K2],
        [z, -L1, -K1, -K2, L1],
        [z, L2, K2, -K1, -L2],
    ])
    return F2, F3


def noise_blocks(n: NoiseCoeffs, t: NoiseCoeffs):
    """F1 (5x5) and F4 (4x4); ``t`` holds the anomalous (tilde) coefficients."""
    b = n.barred
    F1 = _stack([
        [2 * b.M1, 0 * b.M1, 2 * b.O1, 2 * b.O2, -2 * n.M1],
        [0 * b.M1, 2 * b.N1, 2 * b.P1, -2 * b.P2, -2 * n.N1],
        [b.P1, b.O1, b.M1 + b.N1, -b.M2 + b.N2, -n.O1 - n.P1],
        [-b.P2, b.O2, b.M2 - b.N2, b.M1 + b.N1, n.P2 - n.O2],
        [-2 * b.M1, -2 * b.N1, -2 * b.P1 - 2 * b.O1, 2 * b.P2 - 2 * b.O2,
         2 * n.M1 + 2 * n.N1],
    ])
    F4 = _stack([
        [2 * n.M1 + n.N1 - 2 * t.M1, 2 * n.M2 + n.N2 - 2 * t.M2,
         n.O1 - t.O1 - t.P1, n.O2 - t.O2 - t.P2],
        [-2 * n.M2 - n.N2 - 2 * t.M2, 2 * n.M1 + n.N1 + 2 * t.M1,
         -n.O2 - t.O2 - t.P2, n.O1 + t.O1 + t.P1],
        [n.P1 - t.O1 - t.P1, n.P2 - t.O2 - t.P2,
         2 * n.N1 + n.M1 - 2 * t.N1, 2 * n.N2 + n.M2 - 2 * t.N2],
        [-n.P2 - t.O2 - t.P2, n.P1 + t.O1 + t.P1,
         -2 * n.N2 - n.M2 - 2 * t.N2, 2 * n.N1 + n.M1 + 2 * t.N1],
    ])
    return F1, F4


@dataclass(frozen=True)
class GeneratorMatrices:
    J1: np.ndarray
    J2: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    F3: np.ndarray
    F4: np.ndarray

    def full(self) -> np.ndarray:
        """The 9x9 right-hand-side matrix (batched over leading axes)."""
        lead = self.G1.shape[:-2]
        M = np.zeros(lead + (9, 9))
        M[..., :5, :5] = self.J1 - self.G1 - self.F1
        M[..., 5:, 5:] = self.J2 - self.G2 - self.F4
        M[..., :5, 5:] = -self.F2
        M[..., 5:, :5] = -self.F3
        return M


def assemble_generator(t, scenario: Scenario, phonon: PhononCoefficients,
                       field: CoherentDriveCoeffs, noise: NoiseCoeffs,
                       tilde: NoiseCoeffs | None = None) -> GeneratorMatrices:
    """Collect the blocks from coefficients already evaluated at ``t``."""
    d = scenario.dimer
    J1, J2 = free_blocks(d.eps, d.J, scenario.constants.hbar)
    if tilde is None:
        zero = np.zeros_like(np.asarray(noise.M1, dtype=float))
        tilde = NoiseCoeffs(*([zero] * 8))
    G1, G2 = phonon_blocks(phonon)
    F2, F3 = drive_blocks(field)
    F1, F4 = noise_blocks(noise, tilde)
    return GeneratorMatrices(J1, J2, G1, G2, F1, F2, F3, F4)


def generator_at(t, scenario: Scenario, z=None) -> GeneratorMatrices:
    """Evaluate every coefficient at ``t`` and assemble the blocks.

    ``z`` holds accumulator values (shape ``t.shape + (2,)``); omitted means
    zero, which is exact whenever the noise is switched off.
    """
    t = np.asarray(t, dtype=float)
    if z is None:
        z = np.zeros(t.shape + (2,), dtype=complex)
    ph = phonon_coefficients(t, scenario)
    dr = coherent_drive(t, scenario)
    ints = response_integrals(t, scenario, z)
    nc = noise_coefficients(t, scenario, ints)
    tc = tilde_coefficients(t, scenario, z)
    return assemble_generator(t, scenario, ph, dr, nc, tc)
