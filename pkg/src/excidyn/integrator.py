"""Fixed-step RK4 integration of the dimer equations.

The equations are linear in the state and every coefficient depends on time
only (the noise accumulators included), so each RK4 step is a 9x9 matrix.
Propagators are built in vectorized chunks and applied sequentially; this
is algebraically identical to running classical RK4 on the augmented
(state, accumulator) system with coefficients re-evaluated at stage times.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .field import decay_rates, envelope
from .generator import generator_at
from .model import Scenario

log = logging.getLogger(__name__)

CHUNK = 8192

COLUMNS = ("t", "p0", "p1", "p2", "rho_r", "rho_i", "rho_1r", "rho_1i",
           "rho_2r", "rho_2i", "trace_dev", "min_eig", "purity")


class IntegrationError(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass(frozen=True)
class StateVector:
    """R1 = (rho11, rho22, rho_r, rho_i, rho00), R2 = (rho1r, rho1i, rho2r, rho2i)."""

    r: np.ndarray

    @property
    def r1(self) -> np.ndarray:
        return self.r[:5]

    @property
    def r2(self) -> np.ndarray:
        return self.r[5:]

    @classmethod
    def ground(cls) -> "StateVector":
        r = np.zeros(9)
        r[4] = 1.0
        return cls(r)


def initial_state(scenario: Scenario) -> StateVector:
    init = scenario.numerics.initial_state
    if init is None:
        return StateVector.ground()
    return StateVector(np.array(init, dtype=float))


def _has_noise(scenario: Scenario) -> bool:
    n = scenario.noise
    return n.ns != 0 or n.anomalous_ns != 0


def _accumulator_stages(z0, lam, t, h, scenario):
    """RK4 stage values of the accumulators for steps starting at ``t``.

    Returns (z_start, z_stage2, z_stage3, z_stage4, z_after_last) with the
    stage arrays shaped (n, 2).
    """
    p = scenario.pulse
    a0 = envelope(t, p)[:, None]
    ah = envelope(t + h / 2, p)[:, None]
    a1 = envelope(t + h, p)[:, None]
    x = -lam * h
    R = 1 + x + x**2 / 2 + x**3 / 6 + x**4 / 24
    # forcing part of one RK4 step with z = 0 at the start
    k1 = a0
    k2 = -lam * (h / 2 * k1) + ah
    k3 = -lam * (h / 2 * k2) + ah
    k4 = -lam * (h * k3) + a1
    b = h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    zs = np.empty((len(t), 2), dtype=complex)
    for c in range(2):
        zs[:, c] = lfilter([1.0], [1.0, -R[c]], b[:, c], zi=[R[c] * z0[c]])[0]
    z_start = np.vstack([z0[None, :], zs[:-1]])
    k1 = -lam * z_start + a0
    z2 = z_start + h / 2 * k1
    k2 = -lam * z2 + ah
    z3 = z_start + h / 2 * k2
    k3 = -lam * z3 + ah
    z4 = z_start + h * k3
    return z_start, z2, z3, z4, zs[-1]


def step_propagators(t, h: float, scenario: Scenario, z0=None):
    """RK4 propagators P_n (shape (n, 9, 9)) for steps starting at ``t``.

    Returns ``(P, z_end)`` where ``z_end`` is the accumulator value after the
    last step.
    """
    t = np.asarray(t, dtype=float)
    lam = decay_rates(scenario)
    if z0 is None:
        z0 = np.zeros(2, dtype=complex)
    if _has_noise(scenario):
        zs, z2, z3, z4, z_end = _accumulator_stages(z0, lam, t, h, scenario)
        M1 = generator_at(t, scenario, zs).full()
        M2 = generator_at(t + h / 2, scenario, z2).full()
        M3 = generator_at(t + h / 2, scenario, z3).full()
        M4 = generator_at(t + h, scenario, z4).full()
    else:
        _, _, _, _, z_end = _accumulator_stages(z0, lam, t, h, scenario)
        M1 = generator_at(t, scenario).full()
        M2 = generator_at(t + h / 2, scenario).full()
        M3 = M2
        M4 = generator_at(t + h, scenario).full()
    eye = np.eye(9)
    A1 = M1
    A2 = M2 @ (eye + h / 2 * A1)
    A3 = M3 @ (eye + h / 2 * A2)
    A4 = M4 @ (eye + h * A3)
    P = eye + h / 6 * (A1 + 2 * A2 + 2 * A3 + A4)
    return P, z_end


def step(state: StateVector, t: float, h: float, scenario: Scenario, z=None):
    """One RK4 step from ``t``; returns ``(new_state, new_accumulators)``."""
    if not h > 0:
        raise ValueError("step size must be positive")
    P, z_end = step_propagators(np.array([t]), h, scenario, z)
    r = P[0] @ state.r
    if not np.all(np.isfinite(r)):
        raise IntegrationError(f"non-finite state after step at t={t}", t, r)
    return StateVector(r), z_end


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray
    trace_dev: np.ndarray
    min_eig: np.ndarray
    purity: np.ndarray
    positivity_tol: float = 1e-4

    @property
    def p0(self):
        return self.states[:, 4]

    @property
    def p1(self):
        return self.states[:, 0]

    @property
    def p2(self):
        return self.states[:, 1]

    @property
    def rho_r(self):
        return self.states[:, 2]

    @property
    def rho_i(self):
        return self.states[:, 3]

    @property
    def positivity_violation(self) -> float:
        """Magnitude of the most negative eigenvalue (0 when none)."""
        return float(max(0.0, -self.min_eig.min()))

    @property
    def positivity_flagged(self) -> bool:
        return self.positivity_violation > self.positivity_tol

    def table(self) -> np.ndarray:
        """Rows in ``COLUMNS`` order."""
        s = self.states
        return np.column_stack([
            self.times, s[:, 4], s[:, 0], s[:, 1], s[:, 2], s[:, 3],
            s[:, 5], s[:, 6], s[:, 7], s[:, 8],
            self.trace_dev, self.min_eig, self.purity])


def reconstruct_density(state, t, scenario: Scenario) -> np.ndarray:
    """Hermitian 3x3 density matrix in the basis (|0>, |1>, |2>).

    Accepts a single state (9,) or a batch (n, 9) with matching times.
    """
    r = state.r if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    t = np.asarray(t, dtype=float)
    d = scenario.dimer
    phase = np.exp(1j * (d.E + d.eps) * t / scenario.constants.hbar)
    rho01 = (r[..., 5] + 1j * r[..., 6]) * phase
    rho02 = (r[..., 7] + 1j * r[..., 8]) * phase
    rho12 = r[..., 2] + 1j * r[..., 3]
    out = np.zeros(r.shape[:-1] + (3, 3), dtype=complex)
    out[..., 0, 0] = r[..., 4]
    out[..., 1, 1] = r[..., 0]
    out[..., 2, 2] = r[..., 1]
    out[..., 0, 1] = rho01
    out[..., 1, 0] = np.conj(rho01)
    out[..., 0, 2] = rho02
    out[..., 2, 0] = np.conj(rho02)
    out[..., 1, 2] = rho12
    out[..., 2, 1] = np.conj(rho12)
    return out


def monitors(density: np.ndarray):
    """(trace deviation, smallest eigenvalue, purity); batches allowed."""
    tr = np.real(np.trace(density, axis1=-2, axis2=-1))
    min_eig = np.linalg.eigvalsh(density)[..., 0]
    purity = np.sum(np.abs(density) ** 2, axis=(-2, -1))
    return tr - 1.0, min_eig, purity


def integrate(scenario: Scenario, state: StateVector | None = None) -> TrajectoryRecord:
    """Integrate from t0 to ``numerics.t_end`` with fixed step ``numerics.h``.

    The run covers round((t_end - t0)/h) steps; samples are kept every
    ``numerics.stride`` steps plus the final step.
    """
    scenario.validate()
    num = scenario.numerics
    t0 = scenario.pulse.t0
    h = num.h
    n_steps = int(round((num.t_end - t0) / h))
    if n_steps < 1:
        raise ValueError("t_end - t0 shorter than one step")
    r = (state or initial_state(scenario)).r.copy()
    z = np.zeros(2, dtype=complex)
    keep = set(range(0, n_steps + 1, num.stride)) | {n_steps}
    times, states = [t0], [r.copy()]
    for start in range(0, n_steps, CHUNK):
        stop = min(start + CHUNK, n_steps)
        idx = np.arange(start, stop)
        P, z = step_propagators(t0 + idx * h, h, scenario, z)
        for k, n in enumerate(idx):
            r = P[k] @ r
            if n + 1 in keep:
                times.append(t0 + (n + 1) * h)
                states.append(r.copy())
        if not np.all(np.isfinite(r)):
            bad = next(i for i, s in enumerate(states) if not np.all(np.isfinite(s)))
            raise IntegrationError(f"non-finite state near t={times[bad]}",
                                   times[bad], states[bad])
    times = np.array(times)
    states = np.array(states)
    rho = reconstruct_density(states, times, scenario)
    trace_dev, min_eig, purity = monitors(rho)
    rec = TrajectoryRecord(times, states, trace_dev, min_eig, purity, num.positivity_tol)
    if rec.positivity_flagged:
        log.warning("density matrix eigenvalue reached %.3g (tolerance %.1g)",
                    -rec.positivity_violation, num.positivity_tol)
    return rec
