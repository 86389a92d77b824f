"""Phonon memory kernels and the twelve phonon-induced rate coefficients.

Under the single damped-mode bath every kernel is a damped sinusoid,

    g_j(tau) = c_j * cos(Omega tau) exp(-gamma tau)    (j = 1, 4, 5, 6, 7)
    g_j(tau) = c_j * sin(Omega tau) exp(-gamma tau)    (j = 2, 3, 8, 9, 10, 11)

so all time integrals reduce to the complex primitive
``int_0^T exp(-lambda tau) dtau`` after product-to-sum expansion.
Everything here broadcasts over arrays of times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BathParams, Constants, Scenario, level_splitting

COS_FAMILY = (1, 4, 5, 6, 7)
SIN_FAMILY = (2, 3, 8, 9, 10, 11)

_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class KernelConstants:
    """Amplitudes c_1..c_11 (index 0 unused), in 1/(fs^2) per unit G^2."""

    c: np.ndarray
    omega: float
    gamma: float

    def amplitude(self, j: int) -> float:
        return float(self.c[j])

    def kernel(self, j: int, tau):
        """Evaluate g_j(tau) directly."""
        tau = np.asarray(tau, dtype=float)
        trig = np.cos if j in COS_FAMILY else np.sin
        return self.c[j] * trig(self.omega * tau) * np.exp(-self.gamma * tau)


def reduce_kernels(bath: BathParams, constants: Constants) -> KernelConstants:
    """Collapse the k-space kernels onto the damped-mode model.

    Half of k-space carries hbar*Omega_k*G^i_k = G_i, the mirror half G_i*.
    Averaging each summand over the two halves leaves the real part of the
    first-half value; the Im[...] cross kernels (g6, g10) therefore vanish.
    With ``cross_convention='direct'`` the -k partner is taken unconjugated.
    """
    r1 = complex(bath.g1_ratio)
    r2 = complex(bath.g2_ratio)
    x = 2.0 * bath.nB + 1.0
    inv = 1.0 / constants.hbar**2
    if bath.cross_convention == "conjugate":
        m1, m2 = r1.conjugate(), r2.conjugate()
    else:
        m1, m2 = r1, r2
    d2 = abs(r1 - r2) ** 2
    cross = ((r1 - r2) * (m1 + m2)).real
    p12 = r1 * m2
    c = np.zeros(12)
    c[1] = d2 * x
    c[2] = d2
    c[3] = cross
    c[4] = abs(r1) ** 2 * x
    c[5] = p12.real * x
    c[6] = 0.0  # Im parts cancel between k and -k halves
    c[7] = abs(r2) ** 2 * x
    c[8] = abs(r1) ** 2
    c[9] = p12.real
    c[10] = 0.0
    c[11] = abs(r2) ** 2
    return KernelConstants(c * inv, bath.omega_ph, bath.gamma_ph)


def damped_trig_integral(lam, T):
    """int_0^T exp(-lam tau) dtau for complex ``lam`` (broadcasting).

    ``T = inf`` gives 1/lam (requires Re(lam) > 0).  Near lam*T = 0 a short
    Taylor series replaces the quotient.
    """
    lam = np.asarray(lam, dtype=complex)
    T = np.asarray(T, dtype=float)
    lam, T = np.broadcast_arrays(lam, T)
    out = np.empty(lam.shape, dtype=complex)
    inf = np.isinf(T)
    if np.any(inf):
        out[inf] = 1.0 / lam[inf]
    fin = ~inf
    x = lam[fin] * T[fin]
    small = np.abs(x) < _SERIES_CUTOFF
    res = np.empty(x.shape, dtype=complex)
    xs = x[small]
    res[small] = T[fin][small] * (1 - xs / 2 + xs**2 / 6 - xs**3 / 24)
    xb = x[~small]
    res[~small] = -np.expm1(-xb) / lam[fin][~small]
    out[fin] = res
    return out if out.ndim else out[()]


def _cos_int(w, gamma, T):
    return damped_trig_integral(gamma - 1j * w, T).real


def _sin_int(w, gamma, T):
    return damped_trig_integral(gamma - 1j * w, T).imag


def gbar(kind: int, j: int, T, kc: KernelConstants, delta_freq: float):
    """int_0^T g_j(tau) w(tau) dtau with w = 1, sin^2(D tau), sin(2 D tau).

    ``T`` is the elapsed time t - t0 (scalar, array or inf); ``delta_freq``
    is the splitting Delta/hbar in rad/fs.
    """
    W, g = kc.omega, kc.gamma
    b = 2.0 * delta_freq
    cosfam = j in COS_FAMILY
    C = lambda w: _cos_int(w, g, T)  # noqa: E731
    S = lambda w: _sin_int(w, g, T)  # noqa: E731
    if kind == 1:
        val = C(W) if cosfam else S(W)
    elif kind == 2:
        if cosfam:
            val = 0.5 * C(W) - 0.25 * (C(W - b) + C(W + b))
        else:
            val = 0.5 * S(W) - 0.25 * (S(W + b) + S(W - b))
    elif kind == 3:
        if cosfam:
            val = 0.5 * (S(W + b) - S(W - b))
        else:
            val = 0.5 * (C(W - b) - C(W + b))
    else:
        raise ValueError(f"kind must be 1, 2 or 3, got {kind}")
    return kc.c[j] * val


@dataclass(frozen=True)
class PhononCoefficients:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    A1: np.ndarray
    B1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    D1: np.ndarray
    C2: np.ndarray
    D2: np.ndarray

    NAMES = ("A", "B", "C", "D", "E", "F",
             "A1", "B1", "A2", "B2", "C1", "D1", "C2", "D2")

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in self.NAMES}


def coefficients_from_gbar(gb, J: float, eps: float, delta: float, G: float) -> PhononCoefficients:
    """Combine ``gb(kind, j)`` values into A..F and A1..D2."""
    G2 = G * G
    je = J * eps / delta**2
    jh = J / (2 * delta)
    jj = J**2 / delta**2
    return PhononCoefficients(
        A=G2 * (-je * gb(2, 1) + jh * gb(3, 2)),
        B=G2 * (-je * gb(2, 2) - jh * gb(3, 1)),
        C=G2 * (je * gb(2, 1) + jh * gb(3, 2)),
        D=G2 * (je * gb(2, 2) - jh * gb(3, 1)),
        E=G2 * (gb(1, 1) - 2 * jj * gb(2, 1)),
        F=-G2 * gb(1, 3),
        A1=G2 * (gb(1, 4) + jj * (-gb(2, 4) + gb(2, 5) + gb(2, 10))),
        B1=G2 * (gb(1, 8) + jj * (-gb(2, 6) - gb(2, 8) + gb(2, 9))),
        A2=G2 * (gb(1, 7) + jj * (gb(2, 5) - gb(2, 7) - gb(2, 10))),
        B2=G2 * (gb(1, 11) + jj * (gb(2, 6) + gb(2, 9) - gb(2, 11))),
        C1=G2 * (je * (gb(2, 4) - gb(2, 5) - gb(2, 10))
                 + jh * (gb(3, 6) + gb(3, 8) - gb(3, 9))),
        D1=G2 * (je * (gb(2, 6) + gb(2, 8) - gb(2, 9))
                 + jh * (-gb(3, 4) + gb(3, 5) + gb(3, 10))),
        C2=G2 * (je * (gb(2, 5) - gb(2, 7) - gb(2, 10))
                 + jh * (-gb(3, 6) - gb(3, 9) + gb(3, 11))),
        D2=G2 * (je * (gb(2, 6) + gb(2, 9) - gb(2, 11))
                 + jh * (gb(3, 5) - gb(3, 7) - gb(3, 10))),
    )


def phonon_coefficients(t, scenario: Scenario) -> PhononCoefficients:
    """Phonon rate coefficients (1/fs) at time(s) ``t`` >= t0."""
    d = scenario.dimer
    delta = level_splitting(d.eps, d.J)
    kc = reduce_kernels(scenario.bath, scenario.constants)
    T = np.asarray(t, dtype=float) - scenario.pulse.t0
    if np.any(T < 0):
        raise ValueError("phonon coefficients requested before t0")
    if scenario.bath.G == 0:
        zero = np.zeros_like(T)
        return PhononCoefficients(*([zero] * len(PhononCoefficients.NAMES)))
    dfreq = delta / scenario.constants.hbar
    cache = {}

    def gb(kind, j):
        key = (kind, j)
        if key not in cache:
            cache[key] = gbar(kind, j, T, kc, dfreq)
        return cache[key]

    return coefficients_from_gbar(gb, d.J, d.eps, delta, scenario.bath.G)
