"""Parameter records, dimer eigenstructure and the free exciton propagator.

Units: energies in eV, times in fs, angular frequencies in rad/fs and
damping rates in 1/fs.  ``Constants.hbar`` converts between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

HBAR_EV_FS = 0.6582119569

CROSS_CONVENTIONS = ("conjugate", "direct")


class ParameterError(ValueError):
    """Raised when a parameter record violates its invariants."""


@dataclass(frozen=True)
class DimerParams:
    """Dimer Hamiltonian and exciton-photon couplings.

    Molecule 1 sits at ``E + 2*eps``, molecule 2 at ``E``; ``J`` couples them.
    ``F1``/``F2`` are the field couplings in energy units (field strength
    already folded in).
    """

    E: float = 2.0
    eps: float = 0.0
    J: float = 0.0
    F1: float = 0.0
    F2: float = 0.0


@dataclass(frozen=True)
class BathParams:
    """Single damped-mode phonon bath.

    ``g1_ratio``/``g2_ratio`` are the complex ratios G1/G and G2/G.
    ``cross_convention`` selects how k and -k pair in the cross kernels.
    """

    G: float = 0.0
    g1_ratio: complex = 1.0 + 0.0j
    g2_ratio: complex = 1.0 + 0.0j
    nB: float = 0.0
    omega_ph: float = 0.01 / HBAR_EV_FS
    gamma_ph: float = 0.001 / HBAR_EV_FS
    cross_convention: str = "conjugate"


@dataclass(frozen=True)
class PulseParams:
    tau1: float = 1000.0
    tau2: float = 200.0
    delta_prime: float = 0.0
    t0: float = 0.0


@dataclass(frozen=True)
class NoiseParams:
    ns: float = 0.0
    gamma_s: float = 0.0
    omega_s: float = 0.0
    anomalous_ns: float = 0.0


@dataclass(frozen=True)
class Constants:
    hbar: float = HBAR_EV_FS


@dataclass(frozen=True)
class Numerics:
    """Integration controls.

    ``initial_state`` is the 9-vector (R1 then R2); ``None`` means the
    excitonless state.  ``positivity_tol`` is the reporting threshold for
    negative density-matrix eigenvalues.
    """

    h: float = 0.05
    t_end: float = 2000.0
    stride: int = 20
    initial_state: Optional[tuple] = None
    positivity_tol: float = 1e-4


@dataclass(frozen=True)
class Scenario:
    dimer: DimerParams = field(default_factory=DimerParams)
    bath: BathParams = field(default_factory=BathParams)
    pulse: PulseParams = field(default_factory=PulseParams)
    noise: NoiseParams = field(default_factory=NoiseParams)
    constants: Constants = field(default_factory=Constants)
    numerics: Numerics = field(default_factory=Numerics)

    def validate(self) -> "Scenario":
        problems = scenario_problems(self)
        if problems:
            raise ParameterError("; ".join(problems))
        return self

    def with_hbar(self, hbar: float) -> "Scenario":
        """Return a copy using a different hbar, keeping eV-valued inputs fixed.

        Frequencies that the presets specify as energies (phonon frequency,
        damping, detuning) are rescaled so that hbar*omega stays the same.
        """
        old = self.constants.hbar
        k = old / hbar
        bath = replace(self.bath, omega_ph=self.bath.omega_ph * k,
                       gamma_ph=self.bath.gamma_ph * k)
        pulse = replace(self.pulse, delta_prime=self.pulse.delta_prime * k)
        return replace(self, bath=bath, pulse=pulse, constants=Constants(hbar))


def scenario_problems(sc: Scenario) -> list[str]:
    """List every invariant violated by ``sc`` (empty when valid)."""
    out = []
    if not sc.constants.hbar > 0:
        out.append("constants.hbar must be > 0")
    b = sc.bath
    if b.nB < 0:
        out.append("bath.nB must be >= 0")
    if b.G < 0:
        out.append("bath.G must be >= 0")
    if not b.gamma_ph > 0:
        out.append("bath.gamma_ph must be > 0")
    if b.cross_convention not in CROSS_CONVENTIONS:
        out.append(f"bath.cross_convention must be one of {CROSS_CONVENTIONS}")
    p = sc.pulse
    if p.tau1 < 0:
        out.append("pulse.tau1 must be >= 0")
    if not p.tau2 > 0:
        out.append("pulse.tau2 must be > 0")
    n = sc.noise
    if n.ns < 0:
        out.append("noise.ns must be >= 0")
    if n.gamma_s < 0:
        out.append("noise.gamma_s must be >= 0")
    num = sc.numerics
    if not num.h > 0:
        out.append("numerics.h must be > 0")
    if not num.t_end > p.t0:
        out.append("numerics.t_end must exceed pulse.t0")
    if num.stride < 1:
        out.append("numerics.stride must be >= 1")
    if num.initial_state is not None and len(num.initial_state) != 9:
        out.append("numerics.initial_state must have 9 entries")
    if sc.dimer.eps == 0 and sc.dimer.J == 0:
        out.append("degenerate splitting: eps and J are both zero")
    return out


@dataclass(frozen=True)
class Eigensystem:
    delta: float
    e_plus: float
    e_minus: float
    v_plus: np.ndarray
    v_minus: np.ndarray


def level_splitting(eps: float, J: float) -> float:
    """Half the gap between the dimer eigenenergies, sqrt(eps^2 + J^2)."""
    return math.hypot(eps, J)


def eigensystem(params: DimerParams) -> Eigensystem:
    """Eigenpairs of the dimer Hamiltonian in the site basis (|1>, |2>).

    The eigenvectors follow the usual closed form
    ``|+> ~ J|1> + (Delta - eps)|2>`` and ``|-> ~ J|1> - (Delta + eps)|2>``,
    evaluated in whichever algebraically equivalent form avoids the
    0/0 cancellation when J is small.
    """
    eps, J = params.eps, params.J
    delta = level_splitting(eps, J)
    if delta == 0.0:
        raise ParameterError("degenerate splitting: eps = J = 0")
    s = 1.0 if J >= 0 else -1.0
    if eps >= 0:
        vp = s * np.array([delta + eps, J]) / math.sqrt(2 * delta * (delta + eps))
        vm = np.array([J, -(delta + eps)]) / math.sqrt(2 * delta * (delta + eps))
    else:
        vp = np.array([J, delta - eps]) / math.sqrt(2 * delta * (delta - eps))
        vm = s * np.array([delta - eps, -J]) / math.sqrt(2 * delta * (delta - eps))
    e0 = params.E + eps
    return Eigensystem(delta, e0 + delta, e0 - delta, vp, vm)


def hamiltonian(params: DimerParams) -> np.ndarray:
    """2x2 site-basis exciton Hamiltonian (eV)."""
    return np.array([[params.E + 2 * params.eps, params.J],
                     [params.J, params.E]])


def bose_occupation(energy: float, kT: float) -> float:
    """Mean thermal occupation 1/(exp(energy/kT) - 1); zero at kT = 0."""
    if kT == 0:
        return 0.0
    return 1.0 / math.expm1(energy / kT)


def free_propagator(params: DimerParams, t, hbar: float = HBAR_EV_FS) -> np.ndarray:
    """Matrix elements <p|exp(-i H t / hbar)|s> of the free dimer.

    ``t`` may be a scalar or an array; the result has shape ``t.shape + (2, 2)``.
    """
    es = eigensystem(params)
    t = np.asarray(t, dtype=float)
    pp = np.outer(es.v_plus, es.v_plus)
    pm = np.outer(es.v_minus, es.v_minus)
    ph_p = np.exp(-1j * es.e_plus * t / hbar)[..., None, None]
    ph_m = np.exp(-1j * es.e_minus * t / hbar)[..., None, None]
    return ph_p * pp + ph_m * pm


def field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]
