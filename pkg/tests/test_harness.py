import csv
import json
import math
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from steklab.cli import main, parse_shape
from steklab.errors import ConfigError
from steklab.harness import RunConfig, body_without_header, load_config, run_verify, write_outputs
from steklab.shapes import ShapeSpec

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _validator(name):
    docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.json")}
    registry = Registry().with_resources(
        (k, Resource.from_contents(v)) for k, v in docs.items())
    return Draft202012Validator(docs[name], registry=registry)


@pytest.fixture(scope="module")
def disk_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = RunConfig([ShapeSpec("disk")], k_max=3, samples=64, output_dir=str(out), workers=1)
    report = run_verify(cfg)
    write_outputs(report, out)
    return out, report


def test_disk_run_passes(disk_run):
    _, report = disk_run
    s = report["summary"]
    assert s["exit_code"] == 0 and s["fail"] == 0 and s["errors"] == 0
    ids = {r["inequality_id"] for r in report["bounds"]}
    assert {"thm_main", "thm_general", "reformulation", "thm_diam", "cor_concentration",
            "prop_gromov_milman", "trial_certificate", "cor_gny",
            "cor_berger_croke"} <= ids


def test_report_matches_schemas(disk_run):
    out, _ = disk_run
    report = json.loads((out / "report.json").read_text())
    _validator("run_report.schema.json").validate(report)
    for b in report["bounds"]:
        _validator("bound_report.schema.json").validate(b)


def test_csv_mirrors_json(disk_run):
    out, report = disk_run
    with open(out / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(report["bounds"])
    assert rows[0]["inequality_id"] == report["bounds"][0]["inequality_id"]


def test_missing_mesh_is_an_error_diagnostic(tmp_path):
    cfg = RunConfig([ShapeSpec("custom_file", {"path": str(tmp_path / "missing.off")})],
                    k_max=2, output_dir=str(tmp_path), workers=1)
    report = run_verify(cfg)
    assert report["summary"]["exit_code"] == 1
    assert report["diagnostics"][0]["error"] == "ParseError"


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig([])
    with pytest.raises(ConfigError):
        RunConfig([ShapeSpec("disk")], k_max=0)
    with pytest.raises(ConfigError):
        RunConfig([ShapeSpec("disk")], inequalities=("nope",))
    with pytest.raises(ConfigError):
        RunConfig([ShapeSpec("disk"), ShapeSpec("disk")])


def test_load_config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[run]\nk_max = 4\nseed = 7\n\n[shape.small]\nkind = disk\nh = 0.2\n\n"
                 "[shape.mine]\nkind = custom_file\npath = m.off\n")
    cfg = load_config(p, samples=32, k_max=None)
    assert cfg.k_max == 4 and cfg.samples == 32 and cfg.seed == 7
    assert cfg.names == ["small", "mine"]
    assert cfg.shapes[0].parameters == {"h": 0.2}
    assert cfg.shapes[1].parameters["path"] == str(tmp_path / "m.off")
    bad = tmp_path / "bad.ini"
    bad.write_text("[shape.x]\nkind = teapot\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("STEKLAB_OUT", str(tmp_path / "env"))
    assert RunConfig([ShapeSpec("disk")]).output_dir == str(tmp_path / "env")


def test_header_is_the_only_volatile_part(disk_run):
    _, report = disk_run
    body = body_without_header(report)
    assert "header" not in body and "timestamp" not in json.dumps(body)


def test_cli_verify_and_report(tmp_path, capsys):
    code = main(["verify", "--shape", "disk:h=0.2", "--k", "2", "--samples", "32",
                 "--out", str(tmp_path), "--workers", "1"])
    assert code == 0
    assert (tmp_path / "report.json").exists() and (tmp_path / "bounds.csv").exists()
    assert main(["report", str(tmp_path)]) == 0
    assert "checks" in capsys.readouterr().out


def test_cli_missing_mesh(tmp_path, capsys):
    assert main(["spectrum", "--mesh", str(tmp_path / "none.off"), "--k", "2"]) == 1
    assert "ParseError" in capsys.readouterr().err


def test_cli_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "--shape", "disk"])
    assert info.value.code == 2
    assert main(["verify"]) == 1
    with pytest.raises(ConfigError):
        parse_shape("teapot")
    with pytest.raises(ConfigError):
        parse_shape("disk:h")


def test_cli_spectrum_and_invariants(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["spectrum", "--shape", "disk:h=0.1", "--k", "4", "--out", str(out)]) == 0
    vals = json.loads(out.read_text())["eigenvalues"]
    assert vals[1] == pytest.approx(1, rel=0.01)
    inv = tmp_path / "i.json"
    assert main(["invariants", "--shape", "annulus", "--samples", "32", "--out", str(inv)]) == 0
    d = json.loads(inv.read_text())
    _validator("metric_invariant_report.schema.json").validate(d)
    assert d["b"] == 2 and math.isclose(d["distortion"], max(d["distortions"]))


def test_cli_generate_round_trip(tmp_path):
    off = tmp_path / "t.off"
    assert main(["generate", "--shape", "product_torus", "--domain", "--out", str(off)]) == 0
    assert main(["spectrum", "--mesh", str(off), "--k", "2"]) == 0
