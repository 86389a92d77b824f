import json
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from excidyn import preset
from excidyn.cli import main, sample_times
from excidyn.integrator import COLUMNS
from excidyn.io import (ScenarioError, dumps_scenario, format_table, load_scenario, read_csv,
                        save_scenario, scenario_from_dict, scenario_to_dict)
from excidyn.model import Numerics
from excidyn.presets import PRESET_NAMES
from excidyn.sweep import SweepSpec, output_name, run_sweep, set_param, worker_count


def short(sc, t_end=100.0):
    return replace(sc, numerics=replace(sc.numerics, t_end=t_end, stride=20))


@pytest.fixture
def short_fig3(tmp_path):
    path = tmp_path / "short.json"
    save_scenario(short(preset("fig3A")), path)
    return path


# ------------------------------------------------------------- scenario files

@pytest.mark.parametrize("name", PRESET_NAMES)
def test_preset_json_round_trip(name, tmp_path):
    sc = preset(name)
    path = tmp_path / f"{name}.json"
    save_scenario(sc, path)
    assert load_scenario(path) == sc


def test_json_keys_mirror_fields():
    d = scenario_to_dict(preset("fig8"))
    assert set(d) == {"dimer", "bath", "pulse", "noise", "constants", "numerics"}
    assert d["bath"]["g1_ratio"] == [1.0, 0.25]
    assert set(d["dimer"]) == {"E", "eps", "J", "F1", "F2"}


def test_unknown_key_rejected():
    d = scenario_to_dict(preset("fig4"))
    d["dimer"]["Jay"] = 0.001
    with pytest.raises(ScenarioError, match="unknown key dimer.Jay"):
        scenario_from_dict(d)


def test_unknown_section_rejected():
    d = scenario_to_dict(preset("fig4"))
    d["phonons"] = {}
    with pytest.raises(ScenarioError, match="unknown section"):
        scenario_from_dict(d)


def test_missing_phonon_damping_named():
    d = scenario_to_dict(preset("fig5C"))
    del d["bath"]["gamma_ph"]
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(d)
    assert any("bath.gamma_ph" in p for p in info.value.problems)


def test_uncoupled_bath_may_omit_phonon_fields():
    d = scenario_to_dict(preset("fig4"))
    del d["bath"]["gamma_ph"], d["bath"]["omega_ph"]
    assert scenario_from_dict(d).bath.G == 0


def test_negative_decay_time_rejected():
    d = scenario_to_dict(preset("fig4"))
    d["pulse"]["tau2"] = -5.0
    with pytest.raises(ScenarioError, match="tau2"):
        scenario_from_dict(d)


def test_all_problems_listed():
    d = scenario_to_dict(preset("fig5C"))
    d["dimer"]["J"] = "big"
    d["dimer"]["typo"] = 1
    d["pulse"]["tau2"] = -1.0
    del d["bath"]["omega_ph"]
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(d)
    text = " | ".join(info.value.problems)
    for needle in ("dimer.J", "dimer.typo", "tau2", "bath.omega_ph"):
        assert needle in text
    assert len(info.value.problems) >= 4


def test_invalid_json_reported(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError, match="invalid JSON"):
        load_scenario(p)


def test_complex_ratio_accepts_plain_number():
    d = scenario_to_dict(preset("fig5C"))
    d["bath"]["g2_ratio"] = 0.5
    assert scenario_from_dict(d).bath.g2_ratio == 0.5


# ------------------------------------------------------------------ CSV

@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64),
                min_size=3, max_size=3))
def test_csv_floats_round_trip(row):
    text = format_table(("a", "b", "c"), [row])
    back = [float(x) for x in text.splitlines()[1].split(",")]
    assert back == row


def test_repeated_runs_byte_identical(tmp_path, short_fig3):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--scenario", str(short_fig3), "--out", str(a)]) == 0
    assert main(["run", "--scenario", str(short_fig3), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


# ------------------------------------------------------------------ CLI

def test_run_fig4(tmp_path):
    out = tmp_path / "fig4.csv"
    assert main(["run", "--preset", "fig4", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert tuple(header) == COLUMNS
    assert data[0, 1] == 1.0
    assert np.all(np.diff(data[:, 0]) > 0)
    assert not list(tmp_path.glob(".*.tmp"))


def test_preset_command_stdout(capsys):
    assert main(["preset", "fig12"]) == 0
    assert capsys.readouterr().out == dumps_scenario(preset("fig12"))


def test_preset_command_hbar(tmp_path):
    out = tmp_path / "p.json"
    assert main(["preset", "fig8", "--hbar", "1.0", "--out", str(out)]) == 0
    assert load_scenario(out).constants.hbar == 1.0


def test_sweep_fig3_family(tmp_path):
    code = main(["sweep", "--preset", "fig3A", "--param", "dimer.J",
                 "--values", "1e-8,0.0005,0.001,0.002", "--out", str(tmp_path)])
    assert code == 0
    files = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert len(files) == 4
    assert "fig3A_dimer.J=0.0005.csv" in files
    # coupling the molecules moves population onto molecule 2
    first = []
    for J in ("1e-08", "0.0005", "0.001", "0.002"):
        _, d = read_csv(tmp_path / f"fig3A_dimer.J={J}.csv")
        first.append(d[:, 3].max())
    assert first[0] < first[-1]


def test_sweep_order_independent(tmp_path, short_fig3):
    a, b = tmp_path / "a", tmp_path / "b"
    vals = ["0.001", "0.002", "0.003"]
    main(["sweep", "--scenario", str(short_fig3), "--param", "dimer.J",
          "--values", ",".join(vals), "--out", str(a)])
    main(["sweep", "--scenario", str(short_fig3), "--param", "dimer.J",
          "--values", ",".join(reversed(vals)), "--out", str(b)])
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_sweep_parallel_matches_sequential(tmp_path, monkeypatch):
    base = short(preset("fig5C"), 50.0)
    spec = SweepSpec("bath.G", (0.001, 0.003))
    monkeypatch.setenv("EXCIDYN_THREADS", "1")
    seq = run_sweep(base, spec, tmp_path / "seq")
    monkeypatch.setenv("EXCIDYN_THREADS", "2")
    par = run_sweep(base, spec, tmp_path / "par")
    for s, p in zip(seq, par):
        assert open(s, "rb").read() == open(p, "rb").read()


def test_detuning_lock():
    base = preset("fig6B")
    sweep = SweepSpec("dimer.eps", (0.001, 0.002))
    for sc in sweep.scenarios(base):
        assert sc.constants.hbar * sc.pulse.delta_prime == pytest.approx(-sc.dimer.eps)
    free = SweepSpec("dimer.eps", (0.001, 0.002), lock="none").scenarios(base)
    assert all(sc.pulse.delta_prime == base.pulse.delta_prime for sc in free)
    forced = SweepSpec("dimer.eps", (0.001,), lock="detuning").scenarios(preset("fig4"))
    assert forced[0].pulse.delta_prime != 0


def test_auto_lock_ignores_unlocked_base():
    base = preset("fig4")
    base = replace(base, pulse=replace(base.pulse, delta_prime=0.002))
    out = SweepSpec("dimer.eps", (0.001,)).scenarios(base)
    assert out[0].pulse.delta_prime == 0.002


@pytest.mark.parametrize("path", ["dimer", "dimer.K", "phonon.G", "a.b.c"])
def test_bad_parameter_path(path):
    with pytest.raises(KeyError):
        set_param(preset("fig4"), path, 1.0)


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        SweepSpec("dimer.J", ())


def test_output_name():
    assert output_name("fig3A", "dimer.J", 1e-8) == "fig3A_dimer.J=1e-08.csv"


@pytest.mark.parametrize("env, jobs, expected", [("1", 5, 1), ("3", 2, 2), ("8", 5, 5)])
def test_worker_count_env(monkeypatch, env, jobs, expected):
    monkeypatch.setenv("EXCIDYN_THREADS", env)
    assert worker_count(jobs) == expected


def test_asymptote_report(capsys):
    assert main(["asymptote", "--preset", "fig5C"]) == 0
    rep = json.loads(capsys.readouterr().out)
    for key in ("W", "J_ren", "A_as", "B_as", "C_as", "D_as", "E_as", "F_as",
                "stationary_state", "ratio_measured", "ratio_predicted"):
        assert key in rep
    assert rep["W"] == pytest.approx(0.03125, rel=1e-12)
    assert rep["stationary_state"]["rho_i"] == pytest.approx(0.0, abs=1e-12)


def test_asymptote_zero_temperature_null(tmp_path):
    out = tmp_path / "a.json"
    assert main(["asymptote", "--preset", "fig2D", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["beta"] is None
    assert rep["ratio_predicted"] == 0.0


def test_verify_fast(capsys):
    code = main(["verify", "--tier", "fast"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("[PASS]") >= 5 and "[FAIL]" not in out


@pytest.mark.parametrize("kind, first", [("phonon", ("t", "A", "B")), ("field", ("t", "K1", "K2"))])
def test_dump(tmp_path, kind, first):
    out = tmp_path / f"{kind}.csv"
    assert main(["dump", "--preset", "fig12", "--kind", kind, "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert tuple(header[:3]) == first
    assert len(data) == len(sample_times(preset("fig12")))
    if kind == "field":
        assert header[-8:] == ["M1", "M2", "N1", "N2", "O1", "O2", "P1", "P2"]


def test_bad_scenario_exit_code(tmp_path, capsys):
    d = scenario_to_dict(preset("fig5C"))
    del d["bath"]["gamma_ph"]
    d["pulse"]["tau2"] = -1.0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    code = main(["run", "--scenario", str(p), "--out", str(tmp_path / "x.csv")])
    err = json.loads(capsys.readouterr().err)
    assert code == 2
    assert err["error"] == "scenario" and len(err["problems"]) >= 2
    assert not (tmp_path / "x.csv").exists()


def test_unknown_preset_exit_code(capsys, tmp_path):
    assert main(["run", "--preset", "fig99", "--out", str(tmp_path / "x.csv")]) == 2
    assert "fig99" in json.loads(capsys.readouterr().err)["message"]


def test_bad_values_list(capsys, tmp_path):
    code = main(["sweep", "--preset", "fig4", "--param", "dimer.J", "--values", "a,b",
                 "--out", str(tmp_path)])
    assert code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "usage"


def test_numeric_abort_exit_code(tmp_path, capsys):
    sc = replace(preset("fig4"), dimer=replace(preset("fig4").dimer, F1=1e6),
                 numerics=Numerics(h=1.0, t_end=300.0, stride=1))
    p = tmp_path / "wild.json"
    save_scenario(sc, p)
    with np.errstate(over="ignore", invalid="ignore"):
        code = main(["run", "--scenario", str(p), "--out", str(tmp_path / "w.csv")])
    assert code == 3
    assert json.loads(capsys.readouterr().err)["error"] == "numeric"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "excidyn", "preset", "fig4"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["dimer"]["J"] == 0.007
