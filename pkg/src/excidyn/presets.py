"""Figure parameter sets as ready-to-run scenarios.

Energies quoted in the figure captions (hbar*Omega_ph, hbar*gamma_ph,
hbar*delta') are converted to angular frequencies with the scenario's hbar.
Each preset ends at t0 + tau1 + 5*tau2 unless noted.
"""

from __future__ import annotations

from .model import (HBAR_EV_FS, BathParams, Constants, DimerParams, Numerics,
                    NoiseParams, PulseParams, Scenario)

_RATIOS = dict(g1_ratio=1 + 0.25j, g2_ratio=1 - 0.25j)


def _make(*, F1, F2=0.0, J, eps=0.0, hdelta=0.0, tau1=1000.0, tau2=200.0,
          G=0.0, hOmega=0.01, hgamma=0.001, nB=0.0, ns=0.0, gamma_s=0.0,
          omega_s=0.0, hbar=HBAR_EV_FS, h=0.05, stride=20) -> Scenario:
    return Scenario(
        dimer=DimerParams(eps=eps, J=J, F1=F1, F2=F2),
        bath=BathParams(G=G, nB=nB, omega_ph=hOmega / hbar,
                        gamma_ph=hgamma / hbar, **_RATIOS),
        pulse=PulseParams(tau1=tau1, tau2=tau2, delta_prime=hdelta / hbar),
        noise=NoiseParams(ns=ns, gamma_s=gamma_s, omega_s=omega_s),
        constants=Constants(hbar),
        numerics=Numerics(h=h, t_end=tau1 + 5 * tau2, stride=stride),
    )


def _catalog() -> dict:
    cat = {}
    for tag, G in zip("ABCD", (0.0, 0.004, 0.01, 0.02)):
        cat[f"fig2{tag}"] = dict(F1=0.01, J=1e-8, tau1=100.0, tau2=100.0, G=G,
                                  hgamma=0.001, stride=4)
    for tag, J in zip("ABCD", (1e-8, 0.0005, 0.001, 0.002)):
        cat[f"fig3{tag}"] = dict(F1=0.0005, J=J)
    cat["fig4"] = dict(F1=0.0005, J=0.007)
    for tag, G in zip("ABC", (0.0, 0.003, 0.005)):
        cat[f"fig5{tag}"] = dict(F1=0.0005, J=0.0005, G=G)
    for tag, eps in zip("ABCD", (0.0, 0.0005, 0.001, 0.002)):
        cat[f"fig6{tag}"] = dict(F1=0.0005, J=0.002, eps=eps, hdelta=-eps)
    for tag, G in zip("ABC", (0.0, 0.003, 0.005)):
        cat[f"fig7{tag}"] = dict(F1=0.0005, J=0.005, eps=0.004, hdelta=-0.004, G=G)
    cat["fig8"] = dict(F1=0.0005, J=0.0005, G=0.005, hgamma=0.01)
    for tag, F2 in zip("AB", (0.0, 0.0002)):
        cat[f"fig9{tag}"] = dict(F1=0.0002, F2=F2, J=1e-8)
    cat["fig10"] = dict(F1=0.0002, F2=0.0002, J=0.002, eps=0.0005, hdelta=-0.0005)
    for tag, eps in zip("AB", (0.002, -0.002)):
        cat[f"fig11{tag}"] = dict(F1=0.0002, F2=0.0002, J=0.002, eps=eps, hdelta=-eps)
    cat["fig12"] = dict(F1=0.01, J=1e-8, ns=0.1, gamma_s=0.01, omega_s=0.0)
    return cat


CATALOG = _catalog()
PRESET_NAMES = tuple(CATALOG)


def preset(name: str, hbar: float = HBAR_EV_FS) -> Scenario:
    """Scenario for a figure label such as ``"fig4"`` or ``"fig2C"``."""
    try:
        kw = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}") from None
    return _make(hbar=hbar, **kw)
