"""One-parameter scenario sweeps executed in parallel worker processes."""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .io import SECTIONS, write_trajectory
from .integrator import integrate
from .model import Scenario

LOCKS = ("auto", "detuning", "none")


def _detuning_locked(sc: Scenario) -> bool:
    """True when the scenario follows the hbar*delta' = -eps caption rule."""
    target = -sc.dimer.eps / sc.constants.hbar
    return math.isclose(sc.pulse.delta_prime, target, rel_tol=1e-12, abs_tol=1e-15)


def set_param(sc: Scenario, path: str, value) -> Scenario:
    """Copy of ``sc`` with the dotted field ``path`` (e.g. ``dimer.J``) replaced."""
    try:
        section, name = path.split(".")
    except ValueError:
        raise KeyError(f"parameter path must look like 'section.field', got {path!r}") from None
    if section not in SECTIONS:
        raise KeyError(f"unknown section {section!r} in {path!r}")
    rec = getattr(sc, section)
    if name not in {f.name for f in dataclasses.fields(rec)}:
        raise KeyError(f"unknown field {path!r}")
    return replace(sc, **{section: replace(rec, **{name: value})})


@dataclass(frozen=True)
class SweepSpec:
    """Vary ``param`` over ``values``.

    ``lock='auto'`` keeps hbar*delta' = -eps whenever the base scenario
    satisfies it; ``'detuning'`` always imposes it; ``'none'`` never does.
    """

    param: str
    values: tuple
    lock: str = "auto"

    def __post_init__(self):
        if not self.values:
            raise ValueError("sweep value list is empty")
        if self.lock not in LOCKS:
            raise ValueError(f"lock must be one of {LOCKS}")

    def scenarios(self, base: Scenario) -> list[Scenario]:
        set_param(base, self.param, self.values[0])  # resolve the path early
        lock = self.lock == "detuning" or (self.lock == "auto" and _detuning_locked(base))
        out = []
        for v in self.values:
            sc = set_param(base, self.param, v)
            if lock:
                sc = replace(sc, pulse=replace(
                    sc.pulse, delta_prime=-sc.dimer.eps / sc.constants.hbar))
            out.append(sc.validate())
        return out


def output_name(stem: str, param: str, value) -> str:
    return f"{stem}_{param}={value!r}.csv"


def _run_one(args):
    sc, path = args
    write_trajectory(integrate(sc), path)
    return str(path)


def worker_count(n_jobs: int) -> int:
    env = os.environ.get("EXCIDYN_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def run_sweep(base: Scenario, spec: SweepSpec, out_dir, stem: str = "sweep") -> list[str]:
    """Integrate every sweep point and write one CSV each; returns the paths
    in value order regardless of completion order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(sc, out_dir / output_name(stem, spec.param, v))
            for sc, v in zip(spec.scenarios(base), spec.values)]
    workers = worker_count(len(jobs))
    if workers == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
