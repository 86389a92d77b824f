from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from excidyn import HBAR_EV_FS, preset
from excidyn.field import envelope
from excidyn.generator import POPULATION_ROWS, free_blocks, generator_at
from excidyn.integrator import reconstruct_density
from excidyn.model import DimerParams, PulseParams, Scenario
from excidyn.presets import PRESET_NAMES


def liouvillian_oracle(sc, t, R):
    """Rotating-frame von Neumann derivative of the state R at time t."""
    d, hbar = sc.dimer, sc.constants.hbar
    c = envelope(t, sc.pulse) * np.exp(-1j * sc.pulse.delta_prime * t)
    H = np.array([[0, d.F1 * c, d.F2 * c],
                  [d.F1 * np.conj(c), d.eps, d.J],
                  [d.F2 * np.conj(c), d.J, -d.eps]])
    rho = reconstruct_density(R, 0.0, sc)
    return -1j * (H @ rho - rho @ H) / hbar


def test_free_blocks_layout():
    eps, J = 0.001, 0.003
    J1, J2 = free_blocks(eps, J, 1.0)
    assert J1[0, 3] == -2 * J and J1[1, 3] == 2 * J
    assert J1[2, 3] == 2 * eps and J1[3, 2] == -2 * eps
    assert J1[3, 0] == J and J1[3, 1] == -J
    assert np.all(J1[4] == 0) and np.all(J1[:, 4] == 0)
    assert np.array_equal(J2, -J2.T)
    assert J2[1, 0] == eps and J2[0, 3] == -J


@given(st.floats(-0.01, 0.01), st.floats(1e-6, 0.01))
def test_decoupled_generator_has_imaginary_spectrum(eps, J):
    sc = Scenario(dimer=DimerParams(eps=eps, J=J))
    M = generator_at(np.array(5000.0), sc).full()
    w = np.linalg.eigvals(M)
    assert np.max(np.abs(w.real)) <= 1e-12 * (1 + np.max(np.abs(w)))


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_population_rows_sum_to_zero(name):
    sc = preset(name)
    t = np.array([0.0, 37.3, 400.0, 1100.0, 2500.0])
    z = np.full(t.shape + (2,), 3.0 + 1.5j)
    g = generator_at(t, sc, z)
    rows = list(POPULATION_ROWS)
    for block in (g.J1, g.G1, g.F1, g.F2):
        assert np.allclose(block[..., rows, :].sum(axis=-2), 0.0, rtol=0, atol=1e-14)
    full = g.full()
    assert np.allclose(full[..., rows, :].sum(axis=-2), 0.0, rtol=0, atol=1e-14)


def test_fig4_drive_entry_at_start():
    sc = preset("fig4")
    g = generator_at(np.array(0.0), sc)
    assert g.F2[0, 1] == pytest.approx(-2 * sc.dimer.F1 / HBAR_EV_FS, rel=1e-15)
    assert g.F2[0, 0] == 0.0


def test_without_bath_phonon_blocks_vanish():
    g = generator_at(np.linspace(0, 3000, 7), preset("fig12"))
    assert not np.any(g.G1) and not np.any(g.G2)


def test_phonon_blocks_touch_only_coherence_rows():
    g = generator_at(np.array([500.0, 2000.0]), preset("fig8"))
    assert not np.any(g.G1[..., [0, 1, 4], :])
    assert not np.any(g.G1[..., :, 4])
    assert np.any(g.G1[..., 2:4, :4])


def test_without_noise_noise_blocks_vanish():
    g = generator_at(np.linspace(0, 3000, 7), preset("fig5C"))
    assert not np.any(g.F1) and not np.any(g.F4)


@given(t=st.floats(0.0, 3000.0), dprime=st.floats(-0.01, 0.01),
       F1=st.floats(0.0, 0.01), F2=st.floats(0.0, 0.01),
       eps=st.floats(-0.005, 0.005), J=st.floats(1e-4, 0.007),
       R=st.lists(st.floats(-1, 1), min_size=9, max_size=9))
@settings(max_examples=80)
def test_coherent_generator_matches_liouvillian(t, dprime, F1, F2, eps, J, R):
    sc = Scenario(dimer=DimerParams(eps=eps, J=J, F1=F1, F2=F2),
                  pulse=PulseParams(tau1=800.0, tau2=300.0, delta_prime=dprime))
    R = np.array(R)
    M = generator_at(np.array(t), sc).full()
    got = reconstruct_density(M @ R, 0.0, sc)
    ref = liouvillian_oracle(sc, t, R)
    assert np.allclose(got, ref, rtol=0, atol=1e-13)


def test_batched_generator_matches_scalar():
    sc = replace(preset("fig12"), dimer=replace(preset("fig12").dimer, F2=0.003))
    t = np.array([10.0, 900.0, 1300.0])
    z = np.array([[1 + 2j, 3 - 1j], [0.5j, 2.0], [4.0, -1j]])
    batch = generator_at(t, sc, z).full()
    for k in range(3):
        assert np.array_equal(batch[k], generator_at(t[k], sc, z[k]).full())
