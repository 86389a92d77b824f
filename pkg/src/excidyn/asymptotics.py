"""Long-time limit: asymptotic rates, polaron renormalization, stationary state.

Once the pulse is gone and the phonon memory has decayed, R1 obeys a
constant 4x4 linear system in (rho11, rho22, rho_r, rho_i).  Under the
damped-mode bath the delta functions and principal values of the exact
limit become Lorentzians of width gamma_ph, which is precisely what the
closed-form kernels give at T = inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm, null_space

from .model import BathParams, Constants, DimerParams, Scenario, eigensystem, level_splitting
from .phonon import coefficients_from_gbar, gbar, reduce_kernels


@dataclass(frozen=True)
class AsymptoticCoefficients:
    A_as: float
    B_as: float
    C_as: float
    D_as: float
    E_as: float
    F_as: float

    NAMES = ("A_as", "B_as", "C_as", "D_as", "E_as", "F_as")

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in self.NAMES}


@dataclass(frozen=True)
class RenormalizationReport:
    """Polaron reduction of the transfer integral.

    ``J_ren`` is ``J exp(-2W)``; ``J_minus_hbar_B`` is the perturbative
    value read off the long-time generator.
    """

    W: float
    J_ren: float
    J_minus_hbar_B: float


@dataclass(frozen=True)
class AsymptoticState:
    """Stationary exciton state.

    ``quadruple`` is the second-order correction shape (rho11, rho22,
    rho_r, rho_i) built from gamma1/gamma2.  ``stationary`` is the
    normalized (rho11 + rho22 = 1) null vector of the long-time generator,
    and ``eigenbasis`` its 2x2 density matrix in the (|+>, |->) basis.
    """

    quadruple: np.ndarray
    gamma1: float
    gamma2: float
    stationary: np.ndarray
    eigenbasis: np.ndarray

    @property
    def rho_pp(self) -> float:
        return float(self.eigenbasis[0, 0].real)

    @property
    def rho_mm(self) -> float:
        return float(self.eigenbasis[1, 1].real)


@dataclass(frozen=True)
class EquilibriumRatio:
    measured: float
    predicted: float
    infinite: bool = False


def asymptotic_coefficients(scenario: Scenario) -> AsymptoticCoefficients:
    """Exact T -> inf limits of A(t)...F(t)."""
    d = scenario.dimer
    delta = level_splitting(d.eps, d.J)
    kc = reduce_kernels(scenario.bath, scenario.constants)
    dfreq = delta / scenario.constants.hbar
    pc = coefficients_from_gbar(lambda k, j: gbar(k, j, math.inf, kc, dfreq),
                                d.J, d.eps, delta, scenario.bath.G)
    return AsymptoticCoefficients(*(float(np.real(getattr(pc, n)))
                                    for n in ("A", "B", "C", "D", "E", "F")))


def debye_waller(bath: BathParams, constants: Constants,
                 dimer: DimerParams | None = None) -> RenormalizationReport:
    """Debye-Waller exponent of the single-mode bath and the renormalized J.

    Without ``dimer`` the transfer-dependent fields are NaN.
    """
    if not bath.omega_ph > 0:
        raise ValueError("Debye-Waller factor needs omega_ph > 0")
    dg2 = abs(complex(bath.g1_ratio) - complex(bath.g2_ratio)) ** 2 * bath.G**2
    W = dg2 * (2 * bath.nB + 1) / (2 * (constants.hbar * bath.omega_ph) ** 2)
    if dimer is None:
        return RenormalizationReport(W, math.nan, math.nan)
    sc = Scenario(dimer=dimer, bath=bath, constants=constants)
    B_as = asymptotic_coefficients(sc).B_as
    return RenormalizationReport(W, dimer.J * math.exp(-2 * W),
                                 dimer.J - constants.hbar * B_as)


def longtime_generator(asym: AsymptoticCoefficients, dimer: DimerParams,
                       hbar: float) -> np.ndarray:
    """4x4 matrix M with d/dt (rho11, rho22, rho_r, rho_i) = M @ (...)."""
    e, j = dimer.eps / hbar, dimer.J / hbar
    free = np.array([
        [0, 0, 0, -2 * j],
        [0, 0, 0, 2 * j],
        [0, 0, 0, 2 * e],
        [j, -j, -2 * e, 0],
    ])
    a = asym
    damp = np.array([
        [0, 0, 0, 0],
        [0, 0, 0, 0],
        [a.A_as, a.C_as, a.E_as, -a.F_as],
        [a.B_as, -a.D_as, a.F_as, a.E_as],
    ])
    return free - damp


def lorentz_gammas(scenario: Scenario) -> tuple[float, float]:
    """gamma1, gamma2 (1/eV) with the resonance delta(hbar*Omega - 2*Delta)
    broadened into the bath Lorentzian of width gamma_ph."""
    b_ = scenario.bath
    hbar = scenario.constants.hbar
    d = scenario.dimer
    b = 2 * level_splitting(d.eps, d.J) / hbar
    lor = lambda y: (b_.gamma_ph / math.pi) / (b_.gamma_ph**2 + y**2)  # noqa: E731
    dg2 = abs(complex(b_.g1_ratio) - complex(b_.g2_ratio)) ** 2 * b_.G**2
    pref = dg2 / (hbar**3 * b**2)
    w = b_.omega_ph
    gamma1 = pref * (2 * b_.nB + 1) * (lor(b - w) + lor(b + w))
    gamma2 = pref * (lor(b - w) - lor(b + w))
    return gamma1, gamma2


def to_eigenbasis(quad, dimer: DimerParams) -> np.ndarray:
    """2x2 excitonic density matrix in the (|+>, |->) basis."""
    r11, r22, rr, ri = quad
    site = np.array([[r11, rr + 1j * ri], [rr - 1j * ri, r22]])
    es = eigensystem(dimer)
    V = np.column_stack([es.v_plus, es.v_minus])
    return V.T @ site @ V


def stationary_vector(M: np.ndarray) -> np.ndarray:
    """Null vector of ``M`` normalized to unit excited population."""
    ns = null_space(M, rcond=1e-12)
    if ns.shape[1] != 1:
        # fall back to the smallest singular direction
        ns = np.linalg.svd(M)[2][-1:].T
    v = ns[:, 0]
    return v / (v[0] + v[1])


def asymptotic_state(scenario: Scenario) -> AsymptoticState:
    d = scenario.dimer
    delta = level_splitting(d.eps, d.J)
    g1, g2 = lorentz_gammas(scenario)
    quad = np.array([-g1 * delta + g2 * d.eps, -g1 * delta - g2 * d.eps, d.J * g2, 0.0])
    M = longtime_generator(asymptotic_coefficients(scenario), d, scenario.constants.hbar)
    stat = stationary_vector(M)
    return AsymptoticState(quad, g1, g2, stat, to_eigenbasis(stat, d))


def beta_from_occupation(nB: float, delta: float) -> float:
    """Inverse temperature (1/eV) for which the 2*Delta mode holds nB phonons."""
    if nB == 0:
        return math.inf
    return math.log1p(1.0 / nB) / (2 * delta)


def equilibrium_ratio(state, dimer: DimerParams, beta: float,
                      floor: float = 1e-14) -> EquilibriumRatio:
    """Compare rho_pp/rho_mm of ``state`` with the thermal prediction.

    ``state`` is an AsymptoticState, a 2x2 eigenbasis matrix or a site
    quadruple (rho11, rho22, rho_r, rho_i).
    """
    if isinstance(state, AsymptoticState):
        eig = state.eigenbasis
    else:
        arr = np.asarray(state)
        eig = arr if arr.shape == (2, 2) else to_eigenbasis(arr, dimer)
    delta = level_splitting(dimer.eps, dimer.J)
    boltz = 0.0 if math.isinf(beta) else math.exp(-2 * beta * delta)
    predicted = (delta - dimer.eps) / (delta + dimer.eps) * boltz
    pp, mm = float(eig[0, 0].real), float(eig[1, 1].real)
    if abs(mm) < floor:
        return EquilibriumRatio(math.inf, predicted, True)
    return EquilibriumRatio(pp / mm, predicted, False)


def relax(scenario: Scenario, quad0, times) -> np.ndarray:
    """Propagate (rho11, rho22, rho_r, rho_i) under the long-time generator."""
    M = longtime_generator(asymptotic_coefficients(scenario), scenario.dimer,
                           scenario.constants.hbar)
    q0 = np.asarray(quad0, dtype=float)
    return np.array([expm(M * t) @ q0 for t in np.atleast_1d(times)])


def resonant_relaxation(scenario: Scenario, hbar_omega: float | None = None) -> Scenario:
    """Copy of ``scenario`` with the pulse off and the phonon tuned to 2*Delta."""
    d = scenario.dimer
    hbar = scenario.constants.hbar
    w = (hbar_omega if hbar_omega is not None else 2 * level_splitting(d.eps, d.J)) / hbar
    return replace(scenario, dimer=replace(d, F1=0.0, F2=0.0),
                   bath=replace(scenario.bath, omega_ph=w))
