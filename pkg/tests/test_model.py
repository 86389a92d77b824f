import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from excidyn import (HBAR_EV_FS, DimerParams, ParameterError, bose_occupation, eigensystem,
                     free_propagator, level_splitting, preset)
from excidyn.model import Numerics, PulseParams, Scenario, hamiltonian
from excidyn.presets import PRESET_NAMES

energies = st.floats(min_value=-0.05, max_value=0.05, allow_nan=False)
nonzero = st.floats(min_value=1e-6, max_value=0.05)


@pytest.mark.parametrize("eps, J, expected", [
    (0.0, 0.002, 0.002),
    (0.002, 0.0, 0.002),
])
def test_level_splitting_trivial(eps, J, expected):
    assert level_splitting(eps, J) == expected


def test_level_splitting_matches_eigensolve():
    eps, J = 0.004, 0.005
    w = np.linalg.eigvalsh(hamiltonian(DimerParams(eps=eps, J=J)))
    assert level_splitting(eps, J) == pytest.approx((w[1] - w[0]) / 2, rel=1e-12)
    assert level_splitting(eps, J) == pytest.approx(math.sqrt(41) * 1e-3, rel=1e-12)


@given(energies, energies)
def test_level_splitting_symmetries(eps, J):
    d = level_splitting(eps, J)
    assert d == level_splitting(J, eps)
    assert d == level_splitting(-eps, J) == level_splitting(eps, -J)
    assert d >= max(abs(eps), abs(J)) / math.sqrt(2)


def test_eigensystem_symmetric_dimer():
    es = eigensystem(DimerParams(eps=0.0, J=0.002))
    sym = np.array([1.0, 1.0]) / math.sqrt(2)
    anti = np.array([1.0, -1.0]) / math.sqrt(2)
    # for J > 0 the upper state is the symmetric combination
    assert abs(es.v_plus @ sym) == pytest.approx(1.0, abs=1e-12)
    assert abs(es.v_minus @ anti) == pytest.approx(1.0, abs=1e-12)


def test_eigensystem_decoupled_limit():
    es = eigensystem(DimerParams(eps=0.001, J=1e-9))
    # molecule 1 sits 2*eps above molecule 2, so |+> is localized on it
    assert es.v_plus[0] ** 2 > 1 - 1e-9
    assert es.v_minus[1] ** 2 > 1 - 1e-9


def test_eigensystem_against_numeric_solver():
    p = DimerParams(E=2.0, eps=0.0005, J=0.002)
    es = eigensystem(p)
    w = np.linalg.eigvalsh(hamiltonian(p))
    assert es.e_minus == pytest.approx(w[0], abs=1e-13)
    assert es.e_plus == pytest.approx(w[1], abs=1e-13)
    assert es.e_plus == pytest.approx(2.0005 + es.delta, abs=1e-15)


@given(energies, energies)
def test_eigensystem_reconstructs_hamiltonian(eps, J):
    if level_splitting(eps, J) < 1e-9:
        return
    p = DimerParams(eps=eps, J=J)
    es = eigensystem(p)
    V = np.column_stack([es.v_plus, es.v_minus])
    assert np.allclose(V.T @ V, np.eye(2), atol=1e-12, rtol=0)
    H = es.e_plus * np.outer(es.v_plus, es.v_plus) + es.e_minus * np.outer(es.v_minus, es.v_minus)
    assert np.allclose(H, hamiltonian(p), atol=1e-12, rtol=0)


def test_degenerate_dimer_rejected():
    with pytest.raises(ParameterError, match="degenerate splitting"):
        eigensystem(DimerParams(eps=0.0, J=0.0))


def test_bose_occupation_examples():
    assert bose_occupation(0.3, 0.0) == 0.0
    kT = 0.025
    assert bose_occupation(kT * math.log(2), kT) == pytest.approx(1.0, rel=1e-14)
    mpmath.mp.dps = 40
    ref = 1 / (mpmath.exp(mpmath.mpf("0.01") / mpmath.mpf("0.025")) - 1)
    assert bose_occupation(0.01, 0.025) == pytest.approx(float(ref), rel=1e-14)
    # the quoted 2.0333 is the exact 2.03324... rounded up
    assert bose_occupation(0.01, 0.025) == pytest.approx(2.0333, abs=1e-4)


def test_free_propagator_identity_at_zero():
    P = free_propagator(DimerParams(eps=0.001, J=0.002), 0.0)
    assert np.allclose(P, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 37.5, 300.0, 1234.0])
def test_free_propagator_against_expm(t):
    p = DimerParams(eps=0.0, J=0.002)
    P = free_propagator(p, t)
    ref = expm(-1j * hamiltonian(p) * t / HBAR_EV_FS)
    assert np.allclose(P, ref, atol=1e-12, rtol=0)
    assert abs(P[0, 0]) == pytest.approx(abs(math.cos(p.J * t / HBAR_EV_FS)), abs=1e-12)


@given(energies, nonzero, st.floats(0, 5000), st.floats(0, 5000))
@settings(max_examples=50)
def test_free_propagator_unitary_and_group(eps, J, t1, t2):
    p = DimerParams(eps=eps, J=J)
    P1, P2 = free_propagator(p, t1), free_propagator(p, t2)
    assert np.allclose(np.linalg.norm(P1, axis=0), 1.0, atol=1e-12)
    assert np.allclose(free_propagator(p, t1 + t2), P1 @ P2, atol=1e-10, rtol=0)


def test_free_propagator_vectorized():
    p = DimerParams(eps=0.001, J=0.002)
    ts = np.linspace(0, 100, 5)
    P = free_propagator(p, ts)
    assert P.shape == (5, 2, 2)
    assert np.allclose(P[3], free_propagator(p, ts[3]))


def test_preset_fig4():
    sc = preset("fig4")
    d, b, p = sc.dimer, sc.bath, sc.pulse
    assert (d.F1, d.F2, d.J, d.eps) == (0.0005, 0.0, 0.007, 0.0)
    assert p.delta_prime == 0.0
    assert (p.tau1, p.tau2, p.t0) == (1000.0, 200.0, 0.0)
    assert b.G == 0.0


def test_preset_fig2C():
    sc = preset("fig2C")
    b, hbar = sc.bath, sc.constants.hbar
    assert b.G == 0.01 and sc.dimer.F1 == 0.01
    assert (sc.pulse.tau1, sc.pulse.tau2) == (100.0, 100.0)
    assert (b.g1_ratio, b.g2_ratio) == (1 + 0.25j, 1 - 0.25j)
    assert b.nB == 0.0
    assert hbar * b.omega_ph == pytest.approx(0.01, rel=1e-15)
    assert hbar * b.gamma_ph == pytest.approx(0.001, rel=1e-15)


def test_preset_fig12():
    sc = preset("fig12")
    n = sc.noise
    assert sc.dimer.F1 == 0.01
    assert (n.ns, n.gamma_s, n.omega_s) == (0.1, 0.01, 0.0)
    assert (sc.pulse.tau1, sc.pulse.tau2, sc.bath.G) == (1000.0, 200.0, 0.0)


def test_detuning_presets_follow_caption_rule():
    for name in ("fig6B", "fig6C", "fig6D", "fig7A", "fig10", "fig11A", "fig11B"):
        sc = preset(name)
        assert sc.constants.hbar * sc.pulse.delta_prime == pytest.approx(-sc.dimer.eps, rel=1e-14)


def test_unknown_preset():
    with pytest.raises(KeyError, match="unknown preset"):
        preset("fig99")


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_every_preset_validates(name):
    sc = preset(name).validate()
    assert sc.pulse.t0 == 0.0


def test_hbar_override_keeps_energies():
    a = preset("fig8")
    b = preset("fig8", hbar=1.0)
    assert b.constants.hbar == 1.0
    assert b.bath.omega_ph == pytest.approx(a.bath.omega_ph * a.constants.hbar)
    c = a.with_hbar(1.0)
    assert c.bath.gamma_ph == pytest.approx(b.bath.gamma_ph, rel=1e-15)


@pytest.mark.parametrize("kwargs, message", [
    (dict(pulse=PulseParams(tau2=-1.0)), "tau2"),
    (dict(numerics=Numerics(h=0.0)), "numerics.h"),
    (dict(numerics=Numerics(t_end=-5.0)), "t_end"),
])
def test_scenario_validation(kwargs, message):
    sc = Scenario(dimer=DimerParams(J=0.001), **kwargs)
    with pytest.raises(ParameterError, match=message):
        sc.validate()
