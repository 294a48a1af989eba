import json

import pytest
from fastapi.testclient import TestClient

from heisconvex import cli
from heisconvex.api import create_app
from heisconvex.models import ALL_COMMANDS, RunConfig
from heisconvex.service import CSV_COLUMNS, execute, jsonable


def run_main(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    return exc.value.code


def test_harnack_example_exit_zero(tmp_path):
    code = run_main(["verify", "harnack", "--gallery", "koranyi-cone", "--R", "0.33", "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "verify-harnack.json").read_text())
    assert rep["verdict"] == "consistent"
    assert rep["result"]["product_constant"] == pytest.approx(30.26, abs=0.01)
    raw = (tmp_path / "verify-harnack.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "harnack", "--gallery", "torus"],
        ["verify", "nothing"],
        ["verify", "harnack", "--cell", "-1"],
        ["verify", "harnack", "--gallery", "cylinder-bump"],
        ["verify", "harnack", "--param", "amplitude"],
    ],
)
def test_usage_errors_exit_one(tmp_path, argv):
    assert run_main(argv + ["--out", str(tmp_path)]) == 1


def test_json_config_and_flag_precedence(tmp_path):
    cfg = {
        "command": "measure diam-hs",
        "gallery": {"name": "cylinder", "params": {"r": 2.0}},
        "grids": {"base_grid": 3, "seed": 1},
        "output_dir": str(tmp_path / "from-file"),
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    code = run_main(["measure", "diam-hs", "--json", str(p), "--param", "h=0.5", "--out", str(tmp_path / "flag")])
    assert code == 0
    rep = json.loads((tmp_path / "flag" / "measure-diam-hs.json").read_text())
    assert rep["gallery"]["params"] == {"r": 2.0, "h": 0.5}
    assert rep["grids"]["base_grid"] == 3
    assert not (tmp_path / "from-file").exists()


def test_json_config_command_mismatch(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"command": "verify harnack"}))
    assert run_main(["measure", "diam-hs", "--json", str(p), "--out", str(tmp_path)]) == 1


def test_threads_env_fallback(monkeypatch):
    flags = {k: None for k in ("gallery", "cell", "slice_samples", "base_grid", "seed", "t_spacing", "out", "threads", "field", "R")}
    flags.update(param=(), option=())
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.build_config("verify scaling", None, flags)["threads"] == 3
    flags["threads"] = 2
    assert cli.build_config("verify scaling", None, flags)["threads"] == 2


def test_outputs_identical_across_threads(tmp_path):
    outs = []
    for th in ("1", "4"):
        d = tmp_path / th
        assert run_main(["measure", "slicing", "--gallery", "ball", "--cell", "0.2", "--threads", th, "--out", str(d)]) == 0
        outs.append(((d / "measure-slicing.json").read_bytes(), (d / "measure-slicing.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_help_lists_csv_columns():
    from click.testing import CliRunner

    res = CliRunner().invoke(cli.cli, ["verify", "harnack", "--help"])
    assert res.exit_code == 0
    assert "CSV columns" in res.output


def test_every_command_has_columns():
    assert set(CSV_COLUMNS) == set(ALL_COMMANDS)


def test_api_endpoints():
    client = TestClient(create_app())
    assert client.get("/health").json()["status"] == "ok"
    names = {g["name"] for g in client.get("/gallery").json()}
    assert "cylinder-bump" in names
    r = client.post("/run", json={"command": "verify nope"})
    assert r.status_code == 422
    r = client.post("/run", json={"command": "measure diam-hs", "gallery": {"name": "ball"}})
    assert r.status_code == 200 and r.json()["exit_code"] == 0


def test_execute_reports_errors_as_usage():
    res = execute(RunConfig(command="verify harnack", gallery={"name": "cylinder-bump"}))
    assert res.exit_code == 1 and res.report["verdict"] == "error"


def test_jsonable_nonfinite():
    assert jsonable({"a": float("inf"), "b": [float("nan"), 1.0]}) == {"a": "inf", "b": ["nan", 1.0]}
