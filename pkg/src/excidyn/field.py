"""Optical field: pulse envelope, coherent drive and noise coefficients.

The noise correlation has an exponential memory, so the response integrals
are carried by two complex accumulators

    z_pm(t) = int_{t0}^{t} A_n(tau) exp(-lam_pm (t - tau)) dtau,
    lam_pm  = gamma_s - i(delta' - omega_s) -/+ i Delta',

which obey dz/dt = -lam z + A_n(t) and are advanced alongside the state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PulseParams, Scenario, level_splitting


def envelope(t, pulse: PulseParams):
    """Normalized real envelope: flat for tau1, then exp decay with tau2."""
    t = np.asarray(t, dtype=float)
    s = t - pulse.t0
    decay = np.exp(-np.maximum(s - pulse.tau1, 0.0) / pulse.tau2)
    out = np.where(s < 0, 0.0, decay)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CoherentDriveCoeffs:
    K1: np.ndarray
    K2: np.ndarray
    L1: np.ndarray
    L2: np.ndarray


def coherent_drive(t, scenario: Scenario) -> CoherentDriveCoeffs:
    t = np.asarray(t, dtype=float)
    hbar = scenario.constants.hbar
    a = envelope(t, scenario.pulse)
    ph = scenario.pulse.delta_prime * t
    re, im = a * np.cos(ph), a * np.sin(ph)
    f1 = scenario.dimer.F1 / hbar
    f2 = scenario.dimer.F2 / hbar
    return CoherentDriveCoeffs(-f1 * im, f1 * re, -f2 * im, f2 * re)


def noise_correlation(t: float, tau: float, scenario: Scenario) -> complex:
    """Rotating-frame field correlation A(t)A(tau) ns exp(-(i ws + gs)|t - tau|).

    Hermitian under argument swap.
    """
    n, p = scenario.noise, scenario.pulse
    s = t - tau
    phase = np.exp(-1j * n.omega_s * s - n.gamma_s * abs(s))
    return complex(envelope(t, p) * envelope(tau, p) * n.ns * phase)


def decay_rates(scenario: Scenario) -> np.ndarray:
    """The two accumulator rates (lam_plus, lam_minus)."""
    n = scenario.noise
    d = scenario.dimer
    dfreq = level_splitting(d.eps, d.J) / scenario.constants.hbar
    base = n.gamma_s - 1j * (scenario.pulse.delta_prime - n.omega_s)
    return np.array([base - 1j * dfreq, base + 1j * dfreq])


@dataclass
class ConvolutionState:
    """Accumulators z_plus, z_minus; owned by a single integration run."""

    z: np.ndarray
    lam: np.ndarray

    @classmethod
    def start(cls, scenario: Scenario) -> "ConvolutionState":
        return cls(np.zeros(2, dtype=complex), decay_rates(scenario))

    def derivative(self, z, t, pulse: PulseParams):
        return -self.lam * z + envelope(t, pulse)


def exact_accumulators(t, scenario: Scenario) -> np.ndarray:
    """Closed-form z_plus, z_minus for the piecewise-exponential envelope.

    Shape ``t.shape + (2,)``.  Used for diagnostics and as a check on the
    integrated accumulators.
    """
    from .phonon import damped_trig_integral

    p = scenario.pulse
    t = np.asarray(t, dtype=float)
    lam = decay_rates(scenario)
    s = np.maximum(t - p.t0, 0.0)[..., None]
    s1 = np.minimum(s, p.tau1)
    u = np.maximum(s - p.tau1, 0.0)
    plateau = np.exp(-lam * u) * damped_trig_integral(lam, s1)
    # tail = int_0^u exp(-lam (u - x) - x / tau2) dx, factored on the slower rate
    k = 1.0 / p.tau2
    slow_lam = lam.real <= k
    with np.errstate(over="ignore", invalid="ignore"):
        a = np.exp(-lam * u) * damped_trig_integral(k - lam, u)
        b = np.exp(-k * u) * damped_trig_integral(lam - k, u)
    return plateau + np.where(slow_lam, a, b)


def _integrals_from_z(a_t, z, amp):
    """(i1, i2, i3, i4) from the envelope value and accumulators."""
    zp, zm = z[..., 0], z[..., 1]
    cos_part = amp * a_t * 0.5 * (zp + zm)
    sin_part = amp * a_t * (zp - zm) / 2j
    return cos_part.real, sin_part.real, cos_part.imag, sin_part.imag


def response_integrals(t, scenario: Scenario, z):
    """Noise response integrals i1..i4 (fs) given accumulator values ``z``.

    ``z`` is a ``ConvolutionState`` or an array with trailing axis of size 2.
    The squared carrier frequency is absorbed into the field couplings.
    """
    if isinstance(z, ConvolutionState):
        z = z.z
    a_t = envelope(t, scenario.pulse)
    return _integrals_from_z(a_t, np.asarray(z), scenario.noise.ns)


def anomalous_integrals(t, scenario: Scenario, z):
    """Response integrals for the anomalous correlation hook.

    The hook takes the anomalous amplitude correlation with the same
    exponential memory as the normal one; after the exp(-i delta'(t+tau))
    factor the integrand differs only by the global phase exp(-2 i delta' t),
    so the same accumulators serve.
    """
    if isinstance(z, ConvolutionState):
        z = z.z
    t = np.asarray(t, dtype=float)
    a_t = envelope(t, scenario.pulse)
    ph = np.exp(-2j * scenario.pulse.delta_prime * t)
    z = np.asarray(z) * np.asarray(ph)[..., None]
    return _integrals_from_z(a_t, z, scenario.noise.anomalous_ns)


@dataclass(frozen=True)
class NoiseCoeffs:
    M1: np.ndarray
    M2: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    O1: np.ndarray
    O2: np.ndarray
    P1: np.ndarray
    P2: np.ndarray

    NAMES = ("M1", "M2", "N1", "N2", "O1", "O2", "P1", "P2")

    @property
    def barred(self) -> "NoiseCoeffs":
        # vacuum fluctuations are omitted, so barred == unbarred
        return self

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in self.NAMES}


def bilinear_coefficients(ints, f1: float, f2: float, eps: float, J: float) -> NoiseCoeffs:
    """Combine i1..i4 with couplings f1 = F1/hbar, f2 = F2/hbar (rad/fs)."""
    i1, i2, i3, i4 = ints
    delta = level_splitting(eps, J)
    e, j = eps / delta, J / delta
    f11, f22, f12 = f1 * f1, f2 * f2, f1 * f2
    return NoiseCoeffs(
        M1=f11 * i1 - f11 * e * i4 - f12 * j * i4,
        M2=f11 * i3 + f11 * e * i2 + f12 * j * i2,
        N1=f22 * i1 + f22 * e * i4 - f12 * j * i4,
        N2=f22 * i3 - f22 * e * i2 + f12 * j * i2,
        O1=-f11 * j * i4 + f12 * i1 + f12 * e * i4,
        O2=f11 * j * i2 + f12 * i3 - f12 * e * i2,
        P1=-f22 * j * i4 + f12 * i1 - f12 * e * i4,
        P2=f22 * j * i2 + f12 * i3 + f12 * e * i2,
    )


def noise_coefficients(t, scenario: Scenario, ints) -> NoiseCoeffs:
    """Noise rate coefficients M1..P2 (1/fs) from response integrals."""
    d, hbar = scenario.dimer, scenario.constants.hbar
    return bilinear_coefficients(ints, d.F1 / hbar, d.F2 / hbar, d.eps, d.J)


def tilde_coefficients(t, scenario: Scenario, z) -> NoiseCoeffs:
    """Anomalous-correlation coefficients; all zero unless ``anomalous_ns``."""
    d, hbar = scenario.dimer, scenario.constants.hbar
    ints = anomalous_integrals(t, scenario, z)
    return bilinear_coefficients(ints, d.F1 / hbar, d.F2 / hbar, d.eps, d.J)
