"""Command-line interface: ``excidyn {run,preset,sweep,asymptote,verify,dump}``.

Failures print one JSON object on stderr and exit nonzero
(2 for bad input, 3 for numerical aborts, 4 for failed verification).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .asymptotics import (asymptotic_coefficients, asymptotic_state, beta_from_occupation,
                          debye_waller, equilibrium_ratio)
from .field import coherent_drive, exact_accumulators, noise_coefficients, response_integrals
from .integrator import IntegrationError, integrate
from .io import (ScenarioError, dumps_scenario, load_scenario, save_scenario, write_csv,
                 write_text_atomic, write_trajectory)
from .model import ParameterError, Scenario, level_splitting
from .phonon import PhononCoefficients, phonon_coefficients
from .presets import PRESET_NAMES, preset
from .sweep import LOCKS, SweepSpec, run_sweep
from .verify import TIERS, run_tier

EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 2, 3, 4


class CliError(Exception):
    def __init__(self, kind, message, code=EXIT_INPUT, **extra):
        super().__init__(message)
        self.payload = {"error": kind, "message": message, **extra}
        self.code = code


def _source(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", metavar="NAME", help="figure preset, e.g. fig4")
    g.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    p.add_argument("--hbar", type=float, help="override hbar (eV fs)")


def _scenario(args) -> Scenario:
    if args.preset is not None:
        return preset(args.preset, args.hbar) if args.hbar else preset(args.preset)
    sc = load_scenario(args.scenario)
    return sc.with_hbar(args.hbar) if args.hbar else sc


def _parse_values(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise CliError("usage", f"--values must be comma-separated numbers, got {text!r}") from None


def cmd_run(args) -> int:
    sc = _scenario(args)
    rec = integrate(sc)
    write_trajectory(rec, args.out)
    if rec.positivity_flagged:
        print(json.dumps({"warning": "positivity", "min_eig": float(rec.min_eig.min())}),
              file=sys.stderr)
    return 0


def cmd_preset(args) -> int:
    sc = preset(args.name, args.hbar) if args.hbar else preset(args.name)
    text = dumps_scenario(sc)
    if args.out:
        save_scenario(sc, args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    spec = SweepSpec(args.param, _parse_values(args.values), args.lock)
    stem = args.preset or "sweep"
    for path in run_sweep(sc, spec, args.out, stem=stem):
        print(path)
    return 0


def _finite(x):
    return x if math.isfinite(x) else None


def asymptote_report(sc: Scenario) -> dict:
    rep = debye_waller(sc.bath, sc.constants, sc.dimer)
    asym = asymptotic_coefficients(sc)
    st = asymptotic_state(sc)
    delta = level_splitting(sc.dimer.eps, sc.dimer.J)
    beta = beta_from_occupation(sc.bath.nB, delta)
    ratio = equilibrium_ratio(st, sc.dimer, beta)
    keys = ("rho11", "rho22", "rho_r", "rho_i")
    return {
        "W": rep.W,
        "J_ren": rep.J_ren,
        "J_minus_hbar_B": rep.J_minus_hbar_B,
        **asym.as_dict(),
        "stationary_state": dict(zip(keys, map(float, st.stationary))),
        "second_order_shape": dict(zip(keys, map(float, st.quadruple))),
        "gamma1": st.gamma1,
        "gamma2": st.gamma2,
        "rho_pp": st.rho_pp,
        "rho_mm": st.rho_mm,
        "beta": _finite(beta),
        "ratio_measured": _finite(ratio.measured),
        "ratio_predicted": ratio.predicted,
        "ratio_infinite": ratio.infinite,
    }


def cmd_asymptote(args) -> int:
    text = json.dumps(asymptote_report(_scenario(args)), indent=2) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    checks = run_tier(args.tier)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} passed")
    return EXIT_VERIFY if failed else 0


def sample_times(sc: Scenario) -> np.ndarray:
    num = sc.numerics
    n = int(round((num.t_end - sc.pulse.t0) / num.h))
    idx = np.unique(np.r_[np.arange(0, n + 1, num.stride), n])
    return sc.pulse.t0 + idx * num.h


def cmd_dump(args) -> int:
    sc = _scenario(args).validate()
    t = sample_times(sc)
    if args.kind == "phonon":
        pc = phonon_coefficients(t, sc)
        header = ("t",) + PhononCoefficients.NAMES
        cols = [t] + [np.broadcast_to(getattr(pc, n), t.shape) for n in PhononCoefficients.NAMES]
    else:
        k = coherent_drive(t, sc)
        ints = response_integrals(t, sc, exact_accumulators(t, sc))
        nc = noise_coefficients(t, sc, ints)
        header = ("t", "K1", "K2", "L1", "L2", "i1", "i2", "i3", "i4") + nc.NAMES
        cols = [t, k.K1, k.K2, k.L1, k.L2, *ints] + [getattr(nc, n) for n in nc.NAMES]
    write_csv(args.out, header, np.column_stack(cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="excidyn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one scenario and write the trajectory CSV")
    _source(p)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="write a preset as scenario JSON")
    p.add_argument("name", choices=PRESET_NAMES, metavar="NAME")
    p.add_argument("--out", metavar="PATH", help="default: stdout")
    p.add_argument("--hbar", type=float)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sweep", help="vary one parameter; one CSV per value")
    _source(p)
    p.add_argument("--param", required=True, metavar="KEY", help="dotted path, e.g. dimer.J")
    p.add_argument("--values", required=True, metavar="CSVLIST")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--lock", choices=LOCKS, default="auto",
                   help="keep hbar*delta' = -eps (auto: if the base scenario does)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("asymptote", help="long-time report as JSON")
    _source(p)
    p.add_argument("--out", metavar="PATH", help="default: stdout")
    p.set_defaults(func=cmd_asymptote)

    p = sub.add_parser("verify", help="run an oracle suite and print a pass/fail table")
    p.add_argument("--tier", choices=sorted(TIERS), default="fast")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump", help="diagnostic CSV of phonon or field coefficients")
    _source(p)
    p.add_argument("--kind", choices=("phonon", "field"), required=True)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        err, code = exc.payload, exc.code
    except ScenarioError as exc:
        err, code = {"error": "scenario", "message": str(exc), "problems": exc.problems}, EXIT_INPUT
    except (ParameterError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        err, code = {"error": "parameter", "message": str(msg)}, EXIT_INPUT
    except FileNotFoundError as exc:
        err, code = {"error": "io", "message": str(exc)}, EXIT_INPUT
    except IntegrationError as exc:
        err = {"error": "numeric", "message": str(exc), "t": exc.t}
        code = EXIT_NUMERIC
    print(json.dumps(err), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
