import csv
import json

import numpy as np
import pytest

from fluxcr import cli
from fluxcr.config import ConfigError, default_config, from_dict, load, loads


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_defaults_round_trip(ftf_config):
    again = loads(ftf_config.to_yaml())
    assert again.hash() == ftf_config.hash()
    assert again.tree == ftf_config.tree


def test_ft_config(ft_config):
    assert not ft_config.three_qubit
    assert ft_config.qubit_names == ["F1", "T"]
    assert ft_config.coupling.J2 == 0
    assert ft_config.hash() == loads("qubits: {F1: {}, T: {}}\n").hash()


def test_updated_changes_hash(ftf_config):
    c = ftf_config.updated(**{"coupling.J1_MHz": 10.0})
    assert c.hash() != ftf_config.hash()
    assert c.coupling.J1 == pytest.approx(0.010)
    assert ftf_config.coupling.J1 == pytest.approx(0.022)


def test_optimizer_not_in_hash(ftf_config):
    assert ftf_config.updated(**{"optimizer.budget": 50}).hash() == ftf_config.hash()


@pytest.mark.parametrize("text,where", [
    ("qubits:\n  F1: {}\n  T:\n    foo: 1\n", ":4: unknown key qubits.T.foo"),
    ("coupling:\n  J1_MHz: 22\n  J3_MHz: 1\n", ":3: unknown key coupling.J3_MHz"),
    ("bogus: 1\n", ":1: unknown key bogus"),
    ("coupling:\n  J1_MHz: fast\n", ":2: coupling.J1_MHz must be a number"),
])
def test_unknown_keys_report_line(text, where):
    with pytest.raises(ConfigError) as exc:
        loads(text, "c.yaml")
    assert str(exc.value) == "c.yaml" + where


def test_semantic_errors():
    with pytest.raises(ConfigError):
        from_dict({"truncation": {"F1": 9}})
    with pytest.raises(ConfigError):
        from_dict({"qubits": {"T": {}}})
    with pytest.raises(ConfigError):
        from_dict({"integrator": {"dt_ns": -1}})
    with pytest.raises(ConfigError):
        load("/nonexistent/file.yaml")


def test_shipped_configs():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    assert load(root / "ftf.yaml").hash() == default_config(True).hash()
    assert load(root / "ft.yaml").hash() == default_config(False).hash()


def test_grid_parsing():
    assert np.allclose(cli.parse_grid("0:40:5"), [0, 10, 20, 30, 40])
    assert np.allclose(cli.parse_grid("1, 2.5"), [1, 2.5])
    assert cli.parse_cells("4.21,4.2,18;4.01,4,17") == [(4.21, 4.2, 18), (4.01, 4, 17)]
    with pytest.raises(ConfigError):
        cli.parse_grid("a:b")
    with pytest.raises(ConfigError):
        cli.parse_cells("1,2")


# ------------------------------------------------------------------ CLI runs

def test_cli_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("qubits:\n  F1: {}\n  T:\n    foo: 1\n")
    assert cli.main(["spectrum", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert f"{bad}:4: unknown key qubits.T.foo" in capsys.readouterr().err


def test_cli_spectrum(tmp_path):
    assert cli.main(["spectrum", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "spectrum.csv")
    assert len(rows) == 216
    assert sum(int(r["computational"]) for r in rows) == 8
    rec = json.loads((tmp_path / "spectrum.json").read_text())
    assert rec["config_hash"] == rows[0]["config_hash"] == default_config().hash()


def test_cli_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["zz", "--grid", "0,22", "--out", str(d)]) == 0
    assert (a / "zz_J.csv").read_bytes() == (b / "zz_J.csv").read_bytes()
    rows = _rows(a / "zz_J.csv")
    assert abs(float(rows[0]["f_zz1_Hz"])) < 1e-3
    assert abs(float(rows[1]["f_zz1_Hz"]) + 17) < 10


def test_cli_zero_coupling_spectrum(tmp_path):
    cfg = tmp_path / "j0.yaml"
    cfg.write_text("coupling: {J1_MHz: 0, J2_MHz: 0, I_MHz: 0}\n")
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    c = load(cfg)
    eq = c.eigen_qubits()
    for r in _rows(tmp_path / "spectrum.csv"):
        t, a, b = map(int, r["label"])
        bare = eq[0].energies[t] + eq[1].energies[a] + eq[2].energies[b]
        assert float(r["energy_GHz"]) == pytest.approx(bare, abs=1e-12)


@pytest.mark.parametrize("cmd", ["parity", "compound", "readout"])
def test_cli_ideal_dry_run(tmp_path, cmd):
    assert cli.main([cmd, "--ideal", "--grid", "40,50", "--out", str(tmp_path)]) == 0
    rows = _rows(next(tmp_path.glob("*.csv")))
    assert len(rows) == 4
    for r in rows:
        for k in ("F_e", "F_o", "F_8x8", "F_QND"):
            if k in r:
                assert float(r[k]) == pytest.approx(1, abs=1e-12)
        for k in ("E0", "E_s", "E_read"):
            if k in r:
                assert abs(float(r[k])) < 1e-12


def test_cli_requires_ftf(tmp_path):
    cfg = tmp_path / "ft.yaml"
    cfg.write_text("qubits: {F1: {}, T: {}}\n")
    assert cli.main(["parity", "--ideal", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert cli.main(["gate", "--alpha", "2", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_unconverged_exit(tmp_path):
    cfg = tmp_path / "ft.yaml"
    cfg.write_text("qubits: {F1: {}, T: {}}\noptimizer: {budget: 4}\n")
    rc = cli.main(["gate", "--config", str(cfg), "--no-trace", "--no-store", "--out", str(tmp_path)])
    assert rc == 3
    rec = json.loads((tmp_path / "gate_a1.json").read_text())
    assert rec["config_hash"] == load(cfg).hash()


def test_store_round_trip(tmp_path, ft_config, ft_system):
    from fluxcr.calibrate import CalibrationResult
    from fluxcr.gates import phase_correct
    from fluxcr.pulses import PulseSpec, propagate
    p = PulseSpec(2.365204907777981, 0.0013553026293896262, 5.7385726579699865)
    rep = phase_correct(propagate(ft_system, p, e_max=35.0).comp_block)
    store = cli.CalibrationStore(tmp_path)
    store.put(ft_config, 1, 50.0, CalibrationResult(p, rep, {"eta0": 1e-3}, [], True, 0.0))
    hit = cli.calibrated(ft_config, 1, 50.0, store, ds=ft_system)
    assert hit.pulse == p
    assert hit.error == pytest.approx(rep.error_total, rel=1e-12)
    assert store.get(ft_config, 1, 60.0) is None
