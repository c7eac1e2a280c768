import json
import math

import pytest
from typer.testing import CliRunner

from src import main
from src.acceptance import AcceptanceCheck, AcceptanceReport
from src.main import app
from src.tableaux import CATALOG_NAMES, get_scheme

runner = CliRunner()

R1_ANCHOR = 2 * (math.sqrt(5) - 1)


def parse_json(output):
    # skip anything printed before the JSON document
    lines = output.splitlines()
    start = next(i for i, line in enumerate(lines) if line.startswith(("{", "[")))
    return json.loads("\n".join(lines[start:]))


def test_schemes_list_plain():
    result = runner.invoke(app, ["schemes", "list"])
    assert result.exit_code == 0
    for name in CATALOG_NAMES:
        assert name in result.stdout
    assert "IMEX-SSP2(3,3,2)" in result.stdout


def test_schemes_list_json():
    result = runner.invoke(app, ["-o", "json", "schemes", "list"])
    assert result.exit_code == 0
    rows = parse_json(result.stdout)
    by_name = {r["name"]: r for r in rows}
    assert set(CATALOG_NAMES) <= set(by_name)
    assert by_name["ASI-SSP(4,3,2)"]["stages"] == 4
    assert by_name["ASI-SSP(4,3,2)"]["kind"] == "catalog"
    assert "ASI-SSP(6,4,3)" in by_name["ASI-SSP(6,4,3)-axis"]["aliases"]


def test_schemes_list_rich():
    result = runner.invoke(app, ["-o", "rich", "schemes", "list"])
    assert result.exit_code == 0


def test_schemes_show_reports_erratum():
    result = runner.invoke(app, ["schemes", "show", "ASI-SSP(3',3',2)"])
    assert result.exit_code == 0
    assert "valid: 1" in result.stdout
    assert "5/3" in result.stdout and "3/5" in result.stdout


def test_schemes_show_json():
    result = runner.invoke(app, ["-o", "json", "schemes", "show", "ASI-SSP(4,3,2)"])
    assert result.exit_code == 0
    data = parse_json(result.stdout)
    assert data["tableau"]["name"] == "ASI-SSP(4,3,2)"
    assert data["validation"]["passed"] is True


def test_export_then_import(tmp_path):
    path = tmp_path / "asi432.json"
    result = runner.invoke(app, ["schemes", "export", "ASI-SSP(4,3,2)", "--out", str(path)])
    assert result.exit_code == 0
    assert path.exists()

    result = runner.invoke(app, ["schemes", "import", str(path)])
    assert result.exit_code == 0
    assert "valid: 1" in result.stdout


def test_import_invalid_tableau_fails(tmp_path):
    path = get_scheme("ASI-SSP(3',3',2)").with_entry("B", 3, 0, "5/3").save(tmp_path / "bad.json")
    result = runner.invoke(app, ["schemes", "import", str(path)])
    assert result.exit_code == 1
    assert "valid: 0" in result.stdout


def test_import_malformed_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x"}')
    result = runner.invoke(app, ["-o", "json", "schemes", "import", str(path)])
    assert result.exit_code == 1
    assert parse_json(result.stdout)["error"] == "TableauFormatError"


def test_family_instantiation(tmp_path):
    out = tmp_path / "family.json"
    result = runner.invoke(app, [
        "schemes", "family", "(4,3,2)", "-p", "gamma=1/4", "-p", "alpha=1/2", "-p", "beta=1/4",
        "--name", "my-scheme", "--out", str(out),
    ])
    assert result.exit_code == 0
    assert "valid: 1" in result.stdout
    assert json.loads(out.read_text())["name"] == "my-scheme"


def test_family_parameter_out_of_range():
    result = runner.invoke(app, ["-o", "json", "schemes", "family", "(4,3,2)", "-p", "gamma=0", "-p", "alpha=1/2", "-p", "beta=1/4"])
    assert result.exit_code == 1
    assert parse_json(result.stdout)["error"] == "ParameterRangeError"


def test_order_check_plain():
    result = runner.invoke(app, ["order-check", "--scheme", "ASI-SSP(4,3,2)"])
    assert result.exit_code == 0
    assert "attained order: 2" in result.stdout
    assert "w·d = 1/2" in result.stdout


def test_order_check_json_from_file(tmp_path):
    path = get_scheme("ASI-SSP(6,4,3)-axis").save(tmp_path / "t.json")
    result = runner.invoke(app, ["order-check", "-s", str(path), "--json"])
    assert result.exit_code == 0
    data = parse_json(result.stdout)
    assert data["attained_order"] == 3
    assert len(data["conditions"]) == 20


def test_unknown_scheme_is_reported():
    result = runner.invoke(app, ["-o", "json", "order-check", "-s", "ASI-SSP(9,9,9)"])
    assert result.exit_code == 1
    payload = parse_json(result.stdout)
    assert payload["error"] == "UnknownSchemeError"
    assert "ASI-SSP(4,3,2)" in payload["message"]


def test_unknown_subcommand():
    result = runner.invoke(app, ["bogus"])
    assert result.exit_code == 2


def test_stability_writes_artifacts(tmp_path):
    out = tmp_path / "stab"
    result = runner.invoke(app, [
        "-o", "json", "stability", "-s", "ASI-SSP(4,3,2)", "--mode", "imex", "-r", "40",
        "--csv", str(out / "grid.csv"), "--svg", str(out / "region.svg"),
    ])
    assert result.exit_code == 0
    record = parse_json(result.stdout)
    assert record["mode"] == "imex" and record["area"] > 0
    lines = (out / "grid.csv").read_text().splitlines()
    assert lines[0] == "re,im,stable"
    assert len(lines) == 1 + 40 * 40
    assert (out / "region.svg").read_text().lstrip().startswith("<?xml")
    config = json.loads((out / "run-config.json").read_text())
    assert config["subcommand"] == "stability"
    assert config["arguments"]["resolution"] == 40


def test_stability_rejects_bad_mode():
    result = runner.invoke(app, ["stability", "-s", "ASI-SSP(4,3,2)", "--mode", "both"])
    assert result.exit_code == 1
    assert "Error: ValueError" in result.stdout


def test_monotonicity_radius(tmp_path):
    result = runner.invoke(app, ["-o", "json", "monotonicity", "-s", "ASI-SSP(4,3,2)", "--out", str(tmp_path)])
    assert result.exit_code == 0
    record = parse_json(result.stdout)
    assert record["radius"] == pytest.approx(R1_ANCHOR, abs=1e-4)
    assert record["explicit_ssp_radius"] == pytest.approx(2.0, abs=1e-4)
    assert record["implicit_ssp_radius"] > 0
    saved = json.loads((tmp_path / "monotonicity.json").read_text())
    assert saved["radius"] == record["radius"]
    assert (tmp_path / "run-config.json").exists()


def test_monotonicity_point_query():
    result = runner.invoke(app, ["-o", "json", "monotonicity", "-s", "ASI-SSP(4,3,2)", "--r1", "0.5"])
    assert result.exit_code == 0
    assert parse_json(result.stdout)["monotonic"] is True


@pytest.mark.slow
def test_converge_small_grid(tmp_path):
    result = runner.invoke(app, [
        "--seed", "7", "converge", "-s", "ASI-SSP(4,3,2)", "--problem", "pareschi", "--ic", "perturbed",
        "--eps-grid", "0,1", "--dt-grid", "0.1,0.05,0.025", "--t-end", "0.5", "--ref-dt", "5e-3",
        "--out", str(tmp_path),
    ])
    assert result.exit_code == 0
    header = (tmp_path / "surface.csv").read_text().splitlines()[0]
    assert header == "eps,dt,err_x,err_y,newton_fail"
    assert (tmp_path / "rates.csv").exists()
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["dts"] == pytest.approx([0.025, 0.05, 0.1])
    config = json.loads((tmp_path / "run-config.json").read_text())
    assert config["seed"] == 7
    assert config["arguments"]["ic"] == "perturbed"


def test_converge_rejects_bad_grid(tmp_path):
    result = runner.invoke(app, ["converge", "-s", "ASI-SSP(4,3,2)", "--eps-grid", "abc", "--out", str(tmp_path)])
    assert result.exit_code == 1


def fake_report(passed):
    checks = [
        AcceptanceCheck(1, "validate ASI-SSP(4,3,2)", "passes", "passed=True", True),
        AcceptanceCheck(3, "r1 radius", "2.472136", "2.4721360", passed),
    ]
    return AcceptanceReport(checks=checks, options={"resolution": 500})


def test_reproduce_all_success(tmp_path, monkeypatch):
    calls = []

    def fake_run(opts, with_convergence, progress=None):
        calls.append((opts.resolution, with_convergence))
        return fake_report(True)

    monkeypatch.setattr(main, "run_acceptance", fake_run)
    result = runner.invoke(app, ["reproduce-all", "--out", str(tmp_path), "--quick"])
    assert result.exit_code == 0
    assert "2/2 passed" in result.stdout
    assert calls == [(500, True)]
    assert json.loads((tmp_path / "acceptance.json").read_text())["passed"] is True
    assert (tmp_path / "acceptance.csv").exists()
    assert json.loads((tmp_path / "run-config.json").read_text())["arguments"]["quick"] is True


def test_reproduce_all_skip_convergence(tmp_path, monkeypatch):
    calls = []

    def fake_run(opts, with_convergence, progress=None):
        calls.append(with_convergence)
        return fake_report(True)

    monkeypatch.setattr(main, "run_acceptance", fake_run)
    result = runner.invoke(app, ["reproduce-all", "--out", str(tmp_path), "--skip-convergence"])
    assert result.exit_code == 0
    assert calls == [False]
    assert json.loads((tmp_path / "run-config.json").read_text())["arguments"]["skip_convergence"] is True


def test_reproduce_all_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(main, "run_acceptance", lambda opts, with_convergence, progress=None: fake_report(False))
    result = runner.invoke(app, ["reproduce-all", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "1/2 passed" in result.stdout
    assert "FAIL" in result.stdout


def test_replay_reproduces_monotonicity(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    result = runner.invoke(app, ["monotonicity", "-s", "ASI-SSP(4,3,2)", "--r-max", "5", "--out", str(first)])
    assert result.exit_code == 0
    result = runner.invoke(app, ["replay", str(first / "run-config.json"), "--out", str(second)])
    assert result.exit_code == 0
    assert (second / "monotonicity.json").read_bytes() == (first / "monotonicity.json").read_bytes()
    config = json.loads((second / "run-config.json").read_text())
    assert config["subcommand"] == "monotonicity"
    assert config["arguments"]["r_max"] == 5.0


def test_replay_moves_stability_artifacts(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    result = runner.invoke(app, [
        "stability", "-s", "ASI-SSP(4,3,2)", "-r", "30", "--window", "-4,1,-3,3", "--csv", str(first / "grid.csv"),
    ])
    assert result.exit_code == 0
    assert json.loads((first / "run-config.json").read_text())["arguments"]["window"] == [-4.0, 1.0, -3.0, 3.0]
    result = runner.invoke(app, ["replay", str(first), "--out", str(second)])
    assert result.exit_code == 0
    assert (second / "grid.csv").read_text() == (first / "grid.csv").read_text()


def test_replay_rejects_bad_config(tmp_path):
    bad = tmp_path / "run-config.json"
    bad.write_text("{not json")
    result = runner.invoke(app, ["replay", str(bad)])
    assert result.exit_code == 1
    assert "ValueError" in result.stdout

    bad.write_text(json.dumps({"subcommand": "schemes", "arguments": {}}))
    result = runner.invoke(app, ["replay", str(bad)])
    assert result.exit_code == 1

