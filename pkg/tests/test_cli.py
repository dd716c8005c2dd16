import json
import subprocess
import sys

import pytest

from qanomaly import __version__
from qanomaly.cli import RunConfig, load_config, main
from qanomaly.errors import ConfigError

FAST = ["--t-end", "0.02", "--samples", "11", "--grid-sizes", "128,256", "--random-potentials", "2"]


def _run(tmp_path, *args):
    return main(list(args))


def test_bound_state_json(tmp_path):
    out = tmp_path / "bs.json"
    assert main(["bound-state", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["version"] == __version__ and rep["command"] == "bound-state"
    assert rep["config"] == RunConfig().as_dict()
    assert rep["result"]["energy"] == -2.0
    assert rep["result"]["matching"]["small_cutoff_root"] == -2.0


def test_bound_state_csv(tmp_path):
    out = tmp_path / "bs.csv"
    assert main(["bound-state", "--format", "csv", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    header, row = raw.decode().splitlines()
    assert "matching.small_cutoff_root" in header.split(",")
    assert len(header.split(",")) == len(row.split(","))


def test_anomaly_coupling_override(tmp_path):
    out = tmp_path / "a.json"
    assert main(["anomaly", "--coupling", "0", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["quadrature"] == 0.0 and res["closed_form"] == 0.0
    assert res["ratio_delta_vs_closed"] is None  # NaN is written as null


def test_evolve_outputs(tmp_path):
    d = tmp_path / "ev"
    assert main(["evolve", *FAST, "--out", str(d)]) == 0
    num = (d / "numeric.csv").read_text().splitlines()
    cf = (d / "closed_form.csv").read_text().splitlines()
    assert num[0] == cf[0] == "t,re_c1,im_c1,re_c2,im_c2,norm2,deficit,bloch_x,bloch_y,bloch_z"
    assert len(num) == len(cf) == 12
    summ = json.loads((d / "summary.json").read_text())["result"]
    assert {"max_deviation", "max_norm_dev_numeric", "rabi_period_estimate"} <= set(summ)
    assert summ["frame"] == "rotating"


def test_sweep_rows_sorted_with_status(tmp_path):
    out = tmp_path / "s.csv"
    rc = main(["sweep", *FAST, "--sweep-axis", "theta", "--sweep-values", "2.0,0.5,9.0", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "value,status,final_deficit,max_deviation,rabi_period_estimate"
    assert [l.split(",")[0] for l in lines[1:]] == ["0.5", "2.0", "9.0"]
    assert lines[1].split(",")[1] == "ok"
    assert lines[3].split(",")[1].startswith("error(2)")


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"g": 2.0, "cutoff": 0.5}))
    rc = load_config(str(cfg), {"cutoff": 0.1})
    assert rc.g == 2.0 and rc.cutoff == 0.1


@pytest.mark.parametrize(
    "payload",
    [{"bogus": 1}, {"g": 0.3}, {"tol": 1e-20}, {"anomaly_source": "weird"}, {"theta": 5.0}, {"samples": 1}],
)
def test_config_errors(tmp_path, payload):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(payload))
    with pytest.raises(ConfigError):
        load_config(str(cfg), {})
    assert main(["bound-state", "--config", str(cfg), "--out", str(tmp_path / "x.json")]) == 2


def test_exit_code_grid(tmp_path):
    rc = main(["algebra-check", "--r-min", "1.9", "--r-max", "3.0", "--grid-sizes", "64,128", "--out", str(tmp_path / "g.json")])
    assert rc == 5


def test_exit_code_integrator(tmp_path, monkeypatch):
    import qanomaly.cli as cli
    from qanomaly.errors import IntegratorError

    def boom(cfg):
        raise IntegratorError("step budget exhausted", 0.5)

    monkeypatch.setattr(cli, "evolve_run", boom)
    assert main(["evolve", "--out", str(tmp_path / "e")]) == 4


def test_exit_code_quadrature(tmp_path, monkeypatch):
    import qanomaly.cli as cli
    from qanomaly.errors import QuadratureError

    def boom(cfg):
        raise QuadratureError("no convergence", 1.0)

    monkeypatch.setattr(cli, "anomaly_result", boom)
    assert main(["anomaly", "--out", str(tmp_path / "a.json")]) == 3


def test_module_entry_point(tmp_path):
    out = tmp_path / "bs.json"
    proc = subprocess.run(
        [sys.executable, "-m", "qanomaly", "bound-state", "--out", str(out)], capture_output=True
    )
    assert proc.returncode == 0
    assert json.loads(out.read_text())["result"]["beta"] == 2.0


@pytest.mark.parametrize("command", ["bound-state", "anomaly", "algebra-check", "sweep", "evolve"])
def test_determinism(tmp_path, command):
    extra = ["--sweep-axis", "b0", "--sweep-values", "10,50,20"] if command == "sweep" else []
    outs = []
    for k in range(2):
        target = tmp_path / f"run{k}"
        if command != "evolve":
            target = tmp_path / f"run{k}.out"
        assert main([command, *FAST, *extra, "--out", str(target)]) == 0
        if command == "evolve":
            outs.append({p.name: p.read_bytes() for p in sorted(target.iterdir())})
        else:
            outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_evolve_unitary_limit_in_summary(tmp_path):
    d = tmp_path / "u"
    assert main(["evolve", "--anomaly-source", "0", "--t-end", "1.0", "--out", str(d)]) == 0
    summ = json.loads((d / "summary.json").read_text())["result"]
    assert summ["A"] == 0.0
    assert summ["max_norm_dev_numeric"] <= 1e-8
    assert summ["max_norm_dev_closed_form"] <= 1e-12
