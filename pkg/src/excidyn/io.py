"""Scenario JSON and trajectory CSV.

Scenario files mirror the dataclass layout exactly: one object per record
(``dimer``, ``bath``, ``pulse``, ``noise``, ``constants``, ``numerics``)
with keys equal to field names.  Complex ratios are written as
``[re, im]``.  Omitted fields take their defaults, except that a coupled
bath (G > 0) must state ``omega_ph`` and ``gamma_ph`` explicitly.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .integrator import COLUMNS, TrajectoryRecord
from .model import (BathParams, Constants, DimerParams, NoiseParams, Numerics,
                    ParameterError, PulseParams, Scenario, scenario_problems)

SECTIONS = {
    "dimer": DimerParams,
    "bath": BathParams,
    "pulse": PulseParams,
    "noise": NoiseParams,
    "constants": Constants,
    "numerics": Numerics,
}
COMPLEX_FIELDS = {("bath", "g1_ratio"), ("bath", "g2_ratio")}
REQUIRED_WHEN_COUPLED = ("omega_ph", "gamma_ph")


class ScenarioError(ParameterError):
    """Schema or invariant violations; ``problems`` lists every one found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _encode(section, name, value):
    if (section, name) in COMPLEX_FIELDS:
        c = complex(value)
        return [c.real, c.imag]
    if isinstance(value, tuple):
        return list(value)
    return value


def scenario_to_dict(sc: Scenario) -> dict:
    out = {}
    for section in SECTIONS:
        rec = getattr(sc, section)
        out[section] = {f.name: _encode(section, f.name, getattr(rec, f.name))
                        for f in dataclasses.fields(rec)}
    return out


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _decode(section, f, value, problems):
    where = f"{section}.{f.name}"
    if (section, f.name) in COMPLEX_FIELDS:
        if _is_number(value):
            return complex(value)
        if (isinstance(value, list) and len(value) == 2
                and all(_is_number(v) for v in value)):
            return complex(value[0], value[1])
        problems.append(f"{where}: expected [re, im] or a number")
        return None
    if f.name == "initial_state":
        if value is None:
            return None
        if isinstance(value, list) and all(_is_number(v) for v in value):
            return tuple(float(v) for v in value)
        problems.append(f"{where}: expected a list of numbers or null")
        return None
    if f.name == "cross_convention":
        if isinstance(value, str):
            return value
        problems.append(f"{where}: expected a string")
        return None
    if f.name == "stride":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        problems.append(f"{where}: expected an integer")
        return None
    if _is_number(value):
        return float(value)
    problems.append(f"{where}: expected a number")
    return None


def scenario_from_dict(data) -> Scenario:
    """Build and validate a Scenario; raises ScenarioError listing all problems."""
    problems = []
    if not isinstance(data, dict):
        raise ScenarioError(["top level: expected an object"])
    for key in data:
        if key not in SECTIONS:
            problems.append(f"unknown section {key!r}")
    parts = {}
    for section, cls in SECTIONS.items():
        raw = data.get(section, {})
        if not isinstance(raw, dict):
            problems.append(f"{section}: expected an object")
            raw = {}
        known = {f.name: f for f in dataclasses.fields(cls)}
        for key in raw:
            if key not in known:
                problems.append(f"unknown key {section}.{key}")
        kwargs = {}
        for name, f in known.items():
            if name in raw:
                v = _decode(section, f, raw[name], problems)
                if v is not None or name == "initial_state":
                    kwargs[name] = v
        parts[section] = (cls, kwargs, raw)
    bath_raw = parts["bath"][2]
    G = bath_raw.get("G", 0.0)
    if _is_number(G) and G > 0:
        for name in REQUIRED_WHEN_COUPLED:
            if name not in bath_raw:
                problems.append(f"bath.{name} is required when bath.G > 0")
    # keep going with the fields that did decode so invariant violations are
    # reported alongside schema errors
    sc = Scenario(**{s: cls(**kw) for s, (cls, kw, _) in parts.items()})
    problems += scenario_problems(sc)
    if problems:
        raise ScenarioError(problems)
    return sc


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def save_scenario(sc: Scenario, path) -> None:
    write_text_atomic(path, dumps_scenario(sc))


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: invalid JSON ({exc})"]) from None
    return scenario_from_dict(data)


def format_table(header, rows) -> str:
    """CSV text with shortest round-trip float formatting."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> None:
    write_text_atomic(path, format_table(header, rows))


def write_trajectory(record: TrajectoryRecord, path) -> None:
    write_csv(path, COLUMNS, record.table())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    return header, np.array(rows)
