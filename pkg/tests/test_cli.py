import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from mdopt.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_catalog_lists_functions(runner):
    result = runner.invoke(main, ["catalog"])
    assert result.exit_code == 0
    for name in ("paper1d", "paper2d", "stability1d"):
        assert name in result.output


def test_minimize_const_single_row(runner, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["minimize", "--function", "const3",
                                  "--out", str(out)])
    assert result.exit_code == 0
    rows = read_csv(out / "trace.csv")
    assert len(rows) == 1
    assert float(rows[0]["Ef"]) == pytest.approx(3.0)
    payload = json.loads((out / "result.json").read_text())
    assert payload["stop_reason"] == "var_tol"


def test_minimize_paper1d_monotone(runner, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["minimize", "--function", "paper1d",
                                  "--grid", "1024", "--stages", "8",
                                  "--var-tol", "0", "--out", str(out)])
    assert result.exit_code == 0
    efs = [float(r["Ef"]) for r in read_csv(out / "trace.csv")]
    assert all(b < a for a, b in zip(efs, efs[1:]))
    assert (out / "config.json").exists()


def test_minimize_missing_function_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["minimize", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_minimize_unknown_function_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["minimize", "--function", "nope",
                                  "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_sets_outputs(runner, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["sets", "--function", "paper1d",
                                  "--k", "0,1,3,9", "--grid", "1024",
                                  "--out", str(out)])
    assert result.exit_code == 0
    rows = read_csv(out / "measures.csv")
    assert len(rows) == 12  # 4 k values x 3 kinds
    for kind in ("Df", "Dtau", "D0"):
        measures = [float(r["measure"]) for r in rows if r["kind"] == kind]
        assert all(b <= a for a, b in zip(measures, measures[1:]))
    masks = json.loads((out / "masks.json").read_text())
    assert len(masks) == 12
    assert all(sum(run[1] for run in m["rle"]) == 1024 for m in masks)
    profiles = read_csv(out / "density_profiles.csv")
    assert {r["k"] for r in profiles} == {"0", "1", "3", "9"}


def test_sets_density_concentrates(runner, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["sets", "--function", "paper1d", "--k", "0,9",
                         "--grid", "1024", "--out", str(out)])
    rows = read_csv(out / "density_profiles.csv")
    peak = {k: max(float(r["density"]) for r in rows if r["k"] == k)
            for k in ("0", "9")}
    assert peak["9"] > 5 * peak["0"]


def test_sets_empty_k_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["sets", "--function", "paper1d",
                                  "--k", "", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_shrinkrate_ratios(runner, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["shrinkrate", "--function", "paper1d",
                                  "--k", "8", "--dk", "0.01", "--grid", "2048",
                                  "--out", str(out)])
    assert result.exit_code == 0
    rows = read_csv(out / "shrinkrate.csv")
    assert rows
    for r in rows:
        assert 0.95 <= float(r["ratio"]) <= 1.05


def test_useq_strictly_decreasing(runner, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["useq", "--function", "paper2d",
                                  "--resolution", "256", "--out", str(out)])
    assert result.exit_code == 0
    rows = read_csv(out / "useq.csv")
    ts = [float(r["threshold"]) for r in rows]
    assert all(b <= a for a, b in zip(ts, ts[1:]))
    assert sum(b < a for a, b in zip(ts, ts[1:])) >= len(ts) - 2


def test_config_file_defaults(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"minimize": {"function": "const3",
                                            "out": str(tmp_path / "cfgout")}}))
    result = runner.invoke(main, ["--config", str(cfg), "minimize"])
    assert result.exit_code == 0
    assert (tmp_path / "cfgout" / "trace.csv").exists()


def test_byte_identical_reruns(runner, tmp_path):
    args = ["minimize", "--function", "paper1d", "--grid", "512",
            "--stages", "5", "--var-tol", "0"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert runner.invoke(main, args + ["--out", str(out)]).exit_code == 0
        outs.append(out)
    for fname in ("trace.csv", "result.json", "config.json"):
        a = (outs[0] / fname).read_bytes()
        b = (outs[1] / fname).read_bytes()
        if fname == "config.json":
            a = a.replace(str(outs[0]).encode(), b"OUT")
            b = b.replace(str(outs[1]).encode(), b"OUT")
        assert a == b, fname
