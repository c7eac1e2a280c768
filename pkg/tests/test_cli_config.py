import json

import pytest
import typer

from config.config import Settings
from src.main import app
from utils.cli_config import RunConfig, load_run_config, replay_arguments, write_run_config


def command(name):
    return typer.main.get_command(app).commands[name]


def test_write_and_load_run_config(tmp_path):
    path = write_run_config(tmp_path, "monotonicity", scheme="ASI-SSP(4,3,2)", r2=0.0, r_max=10.0)
    data = json.loads(path.read_text())
    assert data["settings"]["region_window"] == "-10,4,-10,10"
    config = load_run_config(tmp_path)
    assert config.subcommand == "monotonicity"
    assert config.resolved_settings["zi_per_decade"] == data["settings"]["zi_per_decade"]
    assert config.output_dir == str(tmp_path)


def test_load_run_config_requires_subcommand(tmp_path):
    (tmp_path / "run-config.json").write_text(json.dumps({"arguments": {}}))
    with pytest.raises(ValueError):
        load_run_config(tmp_path)


def test_apply_settings_skips_file_locations():
    target = Settings()
    config = RunConfig(
        subcommand="stability",
        seed=99,
        resolved_settings={"zi_per_decade": target.zi_per_decade + 3, "output_dir": "/elsewhere", "workers": 64, "unknown": 1},
    )
    changed = config.apply_settings(target)
    assert changed == ["zi_per_decade"]
    assert target.zi_per_decade == Settings().zi_per_decade + 3
    assert target.output_dir != "/elsewhere"
    assert target.seed == 99


def test_replay_arguments_for_stability(tmp_path):
    config = RunConfig(
        subcommand="stability",
        arguments={
            "scheme": "ASI-SSP(4,3,2)", "mode": "imex", "resolution": 40, "window": [-10, 4, -10, 10],
            "csv_path": str(tmp_path / "a" / "grid.csv"), "svg_path": None,
        },
        output_dir=str(tmp_path / "a"),
    )
    argv = replay_arguments(command("stability"), config, tmp_path / "b")
    assert argv[argv.index("--window") + 1] == "-10.0,4.0,-10.0,10.0"
    assert argv[argv.index("--csv") + 1] == str(tmp_path / "b" / "grid.csv")
    assert "--svg" not in argv
    assert argv[argv.index("--scheme") + 1] == "ASI-SSP(4,3,2)"


def test_replay_arguments_positional_flags_and_repeats(tmp_path):
    figure = RunConfig(subcommand="figure", arguments={"figure": "fig3", "scheme": ["A", "B"], "t_end": 0.5})
    argv = replay_arguments(command("figure"), figure, tmp_path)
    assert argv[0] == "fig3"
    assert argv.count("--scheme") == 2
    assert argv[argv.index("--out") + 1] == str(tmp_path)

    quick = RunConfig(subcommand="reproduce-all", arguments={"quick": True, "skip_convergence": False, "resolution": 500})
    argv = replay_arguments(command("reproduce-all"), quick)
    assert "--quick" in argv and "--skip-convergence" not in argv
    assert "--resolution" not in argv
