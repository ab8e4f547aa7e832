import csv
import json

import numpy as np
import pytest

from mirrorchain.cli import main
from mirrorchain.config import ConfigError, resolve

Z5 = {
    "chain": {"scheme": "uniform_pst", "n_sites": 10},
    "errors": [{"kind": "pauli_z", "site": 5, "time_fraction": 1 / 3}],
    "encoding": {"D": 3},
    "pipeline": {"samples": 4, "seed": 7},
}


def run(tmp_path, cfg, command, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out-{command}-{name}"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out


def test_verify_chain_ok(tmp_path):
    code, out = run(tmp_path, {"chain": {"n_sites": 8}}, "verify-chain")
    assert code == 0
    rep = json.loads((out / "verify-chain.json").read_text())
    assert rep["status"] == "ok" and rep["mirror_deviation"] < 1e-10
    assert abs(np.exp(1j * rep["phi"]) - 1j) < 1e-12


def test_verify_chain_not_pst(tmp_path):
    cfg = {"chain": {"scheme": "explicit", "n_sites": 4, "couplings": [1, 1, 1], "transfer_time": 1.5708}}
    code, out = run(tmp_path, cfg, "verify-chain")
    assert code == 1
    assert json.loads((out / "verify-chain.json").read_text())["status"] == "not_pst"


def test_protect_z5(tmp_path):
    code, out = run(tmp_path, Z5, "protect")
    assert code == 0
    rep = json.loads((out / "protect.json").read_text())
    assert rep["fidelity"] > 1 - 1e-8 and rep["baseline_fidelity"] < 0.99
    assert rep["D"] == 3 and rep["kernel_dim"] == 2 and rep["n_bar"] == 1
    rows = list(csv.DictReader((out / "protect.csv").open()))
    assert len(rows) == 4 and all(float(r["fidelity"]) > 1 - 1e-8 for r in rows)


def test_probe_protect_z5(tmp_path):
    code, out = run(tmp_path, Z5, "probe-protect")
    assert code == 0
    rep = json.loads((out / "probe-protect.json").read_text())
    assert rep["probe"]["span_dims"] == [0, 1]
    assert rep["containment_residual"] < 1e-8
    assert rep["fidelity"] > 1 - 1e-8


def test_probe_protect_auto_grows(tmp_path):
    cfg = {**Z5, "errors": [{"kind": "hop", "sites": [3, 4], "theta": 0.8, "time_fraction": 0.25}],
           "encoding": {"D": "auto"}}
    code, out = run(tmp_path, cfg, "probe-protect")
    assert code == 0
    assert json.loads((out / "probe-protect.json").read_text())["D"] == 4


def test_reproducible_bytes(tmp_path):
    _, a = run(tmp_path, Z5, "protect", name="a.json")
    _, b = run(tmp_path, Z5, "protect", "--jobs", "3", name="b.json")
    assert (a / "protect.csv").read_bytes() == (b / "protect.csv").read_bytes()
    ja = json.loads((a / "protect.json").read_text())
    jb = json.loads((b / "protect.json").read_text())
    assert ja == jb
    _, c = run(tmp_path, Z5, "protect", name="a.json")
    assert (a / "protect.json").read_bytes() == (c / "protect.json").read_bytes()


def test_seed_environment_override(tmp_path, monkeypatch):
    _, a = run(tmp_path, Z5, "protect", name="a.json")
    monkeypatch.setenv("MIRRORCHAIN_SEED", "99")
    _, b = run(tmp_path, Z5, "protect", name="b.json")
    _, c = run(tmp_path, {**Z5, "pipeline": {"samples": 4, "seed": 99}}, "protect", name="c.json")
    assert (a / "protect.csv").read_bytes() != (b / "protect.csv").read_bytes()
    assert (b / "protect.csv").read_bytes() == (c / "protect.csv").read_bytes()
    assert json.loads((b / "protect.json").read_text())["config"]["pipeline"]["seed"] == 99


def test_capacity_exit(tmp_path):
    cfg = {**Z5, "errors": [{"kind": "phase", "site": s, "theta": 1.0, "time_fraction": 0.5} for s in (1, 3, 5, 7)],
           "encoding": {"D": "auto"}}
    code, out = run(tmp_path, cfg, "protect")
    assert code == 3
    assert json.loads((out / "protect.json").read_text())["status"] == "insufficient_region"


def test_fixed_d_too_small_is_capacity(tmp_path):
    code, _ = run(tmp_path, {**Z5, "encoding": {"D": 2}}, "protect")
    assert code == 3


@pytest.mark.parametrize("cfg", [
    {"chain": {"n_sites": 1}},
    {"chain": {"n_sites": 8}, "bogus": 1},
    {"chain": {"n_sites": 8}, "errors": [{"kind": "pauli_z", "site": 2}]},
    {"chain": {"n_sites": 8}, "encoding": {"D": 1}},
    {"chain": {"n_sites": 8}, "sweep": {"axis": "theta", "values": [1]}},
])
def test_schema_errors_exit_2(tmp_path, cfg, capsys):
    code, _ = run(tmp_path, cfg, "protect")
    assert code == 2
    assert "usage error at /" in capsys.readouterr().err


def test_config_error_pointer():
    with pytest.raises(ConfigError) as info:
        resolve({"chain": {"n_sites": 8}, "errors": [{"kind": "spin_flip", "site": 2, "time": 0}]})
    assert info.value.pointer == "/errors/0/kind"


def test_semantic_errors_exit_2(tmp_path):
    bad_site = {**Z5, "errors": [{"kind": "pauli_z", "site": 12, "time_fraction": 0.5}]}
    assert run(tmp_path, bad_site, "protect")[0] == 2
    x_err = {**Z5, "errors": [{"kind": "pauli_x", "site": 3, "time_fraction": 0.5}]}
    assert run(tmp_path, x_err, "protect")[0] == 2
    bad_chain = {"chain": {"scheme": "explicit", "n_sites": 4, "couplings": [1, 1], "transfer_time": 1}}
    assert run(tmp_path, bad_chain, "protect")[0] == 2
    assert run(tmp_path, Z5, "sweep")[0] == 2


def test_missing_and_invalid_files(tmp_path):
    assert main(["protect", "--config", str(tmp_path / "nope.json")]) == 2
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["protect", "--config", str(p)]) == 2


def test_empty_sweep_writes_header(tmp_path):
    code, out = run(tmp_path, {**Z5, "sweep": {"axis": "time_fraction", "values": []}}, "sweep")
    assert code == 0
    assert (out / "sweep.csv").read_text() == "index,axis,value,D,status,min_fidelity,baseline_fidelity\n"


def test_d_sweep(tmp_path):
    code, out = run(tmp_path, {**Z5, "sweep": {"axis": "D", "values": [2, 3, 4]}}, "sweep")
    assert code == 0
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert [r["status"] for r in rows] == ["insufficient_region", "ok", "ok"]
    assert rows[0]["min_fidelity"] == ""
    assert all(float(r["min_fidelity"]) > 1 - 1e-8 for r in rows[1:])


def test_time_sweep(tmp_path):
    code, out = run(tmp_path, {**Z5, "sweep": {"axis": "time_fraction", "values": [0.0, 0.5, 1.0]}},
                    "sweep", "--jobs", "2")
    assert code == 0
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert [float(r["value"]) for r in rows] == [0.0, 0.5, 1.0]
    assert all(r["status"] == "ok" for r in rows)


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip()
